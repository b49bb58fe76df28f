// Copyright 2026 The sgdst Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Uncased WordPiece tokenization with character offsets, compatible with BERT
// vocab.txt files.

#ifndef SGDST_TOKENIZER_H_
#define SGDST_TOKENIZER_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sgdst {

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kIntentToken = "[INTENT]";
inline constexpr std::string_view kSlotToken = "[SLOT]";
inline constexpr std::string_view kValueToken = "[VALUE]";

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  static Vocabulary load(const std::filesystem::path& vocab_txt);
  void save(const std::filesystem::path& vocab_txt) const;

  // Returns the existing id when already present.
  int add(std::string_view token);
  int id(std::string_view token) const;  // -1 if absent
  bool contains(std::string_view token) const { return id(token) >= 0; }
  const std::string& token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Appends [INTENT], [SLOT], [VALUE] when missing.
  void add_marker_tokens();

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct Token {
  int id = 0;
  int begin = 0;  // byte offsets into the source text
  int end = 0;
};

struct SpecialIds {
  int pad, unk, cls, sep, intent, slot, value;
};

class WordPieceTokenizer {
 public:
  explicit WordPieceTokenizer(Vocabulary vocab);

  std::vector<Token> tokenize(std::string_view text) const;
  std::vector<int> encode(std::string_view text) const;
  std::string decode(const std::vector<int>& ids) const;

  const Vocabulary& vocabulary() const { return vocab_; }
  const SpecialIds& special() const { return special_; }

 private:
  void word_pieces(std::string_view text, int begin, int end,
                   std::vector<Token>* out) const;

  Vocabulary vocab_;
  SpecialIds special_;
};

// Splits lowercased text into whitespace/punctuation-delimited words with
// byte offsets.
std::vector<std::pair<int, int>> basic_word_bounds(std::string_view text);

// A word-level vocabulary over `texts` with single-character fallback pieces,
// the BERT special tokens, and the marker tokens.
Vocabulary build_vocabulary(const std::vector<std::string>& texts,
                            int min_count = 1);

}  // namespace sgdst

#endif  // SGDST_TOKENIZER_H_
