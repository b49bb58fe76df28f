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

// Prints the final encoder states for one input as a JSON matrix, for the
// parity check against the reference BERT implementation.
//
//   encoder_states <pretrained_dir> <vocab_size> <ids> <segments> <mask>
//
// The last three arguments are comma-separated integer lists.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdst/model.h"

namespace {

std::vector<int> parse_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 6) {
    std::cerr << "usage: encoder_states <dir> <vocab_size> <ids> <segments> <mask>\n";
    return 2;
  }
  try {
    sgdst::ModelConfig config;
    config.encoder.kind = sgdst::EncoderSpec::Kind::kPretrained;
    config.encoder.pretrained_dir = argv[1];
    sgdst::Model model = sgdst::Model::init(config, std::stoi(argv[2]), 1);
    sgdst::EncodedInput input;
    input.token_ids = parse_list(argv[3]);
    input.segment_ids = parse_list(argv[4]);
    input.attention_mask = parse_list(argv[5]);
    sgdst::Tape tape;
    const sgdst::Matrix& h = tape.value(model.encode(tape, input, nullptr));
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < h.cols(); ++c) row.push_back(h(r, c));
      rows.push_back(row);
    }
    std::cout << rows.dump() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
