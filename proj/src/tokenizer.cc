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

#include "sgdst/tokenizer.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace sgdst {
namespace {

constexpr int kMaxCharsPerWord = 100;

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

// ASCII punctuation is split off as its own word, as BERT does.
bool is_punct(unsigned char c) { return c < 128 && std::ispunct(c) != 0; }

char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  for (std::string& t : tokens) add(t);
}

Vocabulary Vocabulary::load(const std::filesystem::path& vocab_txt) {
  std::ifstream in(vocab_txt);
  if (!in) throw std::runtime_error("cannot open " + vocab_txt.string());
  Vocabulary vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Keep line numbers as ids even for duplicate entries.
    vocab.index_.emplace(line, static_cast<int>(vocab.tokens_.size()));
    vocab.tokens_.push_back(line);
  }
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& vocab_txt) const {
  std::ofstream out(vocab_txt);
  if (!out) throw std::runtime_error("cannot write " + vocab_txt.string());
  for (const std::string& t : tokens_) out << t << '\n';
}

int Vocabulary::add(std::string_view token) {
  std::string key(token);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(tokens_.size());
  index_.emplace(key, id);
  tokens_.push_back(std::move(key));
  return id;
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

void Vocabulary::add_marker_tokens() {
  add(kIntentToken);
  add(kSlotToken);
  add(kValueToken);
}

WordPieceTokenizer::WordPieceTokenizer(Vocabulary vocab)
    : vocab_(std::move(vocab)) {
  auto require = [&](std::string_view token) {
    int id = vocab_.id(token);
    if (id < 0) {
      throw std::invalid_argument("vocabulary lacks " + std::string(token));
    }
    return id;
  };
  special_.pad = require(kPadToken);
  special_.unk = require(kUnkToken);
  special_.cls = require(kClsToken);
  special_.sep = require(kSepToken);
  special_.intent = require(kIntentToken);
  special_.slot = require(kSlotToken);
  special_.value = require(kValueToken);
}

std::vector<std::pair<int, int>> basic_word_bounds(std::string_view text) {
  std::vector<std::pair<int, int>> bounds;
  int n = static_cast<int>(text.size());
  int i = 0;
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
    } else if (is_punct(c)) {
      bounds.emplace_back(i, i + 1);
      ++i;
    } else {
      int start = i;
      while (i < n && !is_space(static_cast<unsigned char>(text[i])) &&
             !is_punct(static_cast<unsigned char>(text[i]))) {
        ++i;
      }
      bounds.emplace_back(start, i);
    }
  }
  return bounds;
}

void WordPieceTokenizer::word_pieces(std::string_view text, int begin, int end,
                                     std::vector<Token>* out) const {
  std::string word;
  word.reserve(end - begin);
  for (int i = begin; i < end; ++i) word.push_back(lower(text[i]));
  if (static_cast<int>(word.size()) > kMaxCharsPerWord) {
    out->push_back({special_.unk, begin, end});
    return;
  }
  std::vector<Token> pieces;
  int start = 0;
  int n = static_cast<int>(word.size());
  while (start < n) {
    int stop = n;
    int found = -1;
    while (start < stop) {
      std::string candidate = word.substr(start, stop - start);
      if (start > 0) candidate = "##" + candidate;
      found = vocab_.id(candidate);
      if (found >= 0) break;
      --stop;
    }
    if (found < 0) {
      out->push_back({special_.unk, begin, end});
      return;
    }
    pieces.push_back({found, begin + start, begin + stop});
    start = stop;
  }
  out->insert(out->end(), pieces.begin(), pieces.end());
}

std::vector<Token> WordPieceTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  for (auto [begin, end] : basic_word_bounds(text)) {
    word_pieces(text, begin, end, &tokens);
  }
  return tokens;
}

std::vector<int> WordPieceTokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const Token& t : tokenize(text)) ids.push_back(t.id);
  return ids;
}

std::string WordPieceTokenizer::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    const std::string& piece = vocab_.token(id);
    if (piece.rfind("##", 0) == 0) {
      out += piece.substr(2);
    } else {
      if (!out.empty()) out.push_back(' ');
      out += piece;
    }
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<std::string>& texts,
                            int min_count) {
  std::map<std::string, int> counts;
  std::set<char> chars;
  for (const std::string& text : texts) {
    for (auto [begin, end] : basic_word_bounds(text)) {
      std::string word;
      for (int i = begin; i < end; ++i) {
        word.push_back(lower(text[i]));
        chars.insert(lower(text[i]));
      }
      ++counts[word];
    }
  }
  for (char c = 'a'; c <= 'z'; ++c) chars.insert(c);
  for (char c = '0'; c <= '9'; ++c) chars.insert(c);

  Vocabulary vocab({std::string(kPadToken), std::string(kUnkToken),
                    std::string(kClsToken), std::string(kSepToken),
                    std::string(kMaskToken)});
  vocab.add_marker_tokens();
  for (char c : chars) {
    vocab.add(std::string(1, c));
    vocab.add("##" + std::string(1, c));
  }
  for (const auto& [word, count] : counts) {
    if (count >= min_count) vocab.add(word);
  }
  return vocab;
}

}  // namespace sgdst
