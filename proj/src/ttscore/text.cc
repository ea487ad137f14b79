// Copyright (c) 2026 The percept-tts Authors
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

#include "ttscore/text.h"

#include <set>

#include "common/error.h"

namespace percept::ttscore {

std::vector<std::string> SplitUtf8(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    }
    len = std::min(len, text.size() - i);
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

CharVocabulary::CharVocabulary(const std::vector<std::string>& symbols)
    : symbols_(symbols) {
  for (size_t i = 0; i < symbols_.size(); ++i) {
    if (!index_.emplace(symbols_[i], static_cast<int>(i) + 1).second) {
      throw DataError("duplicate vocabulary symbol '" + symbols_[i] + "'");
    }
  }
}

CharVocabulary CharVocabulary::FromTexts(const std::vector<std::string>& texts) {
  std::set<std::string> chars;
  for (const auto& t : texts) {
    for (auto& c : SplitUtf8(t)) chars.insert(std::move(c));
  }
  return CharVocabulary(std::vector<std::string>(chars.begin(), chars.end()));
}

TextSequence CharVocabulary::Encode(const std::string& text) const {
  if (text.empty()) throw DataError("cannot encode empty text");
  TextSequence seq;
  for (const auto& c : SplitUtf8(text)) {
    const auto it = index_.find(c);
    seq.token_ids.push_back(it == index_.end() ? 0 : it->second);
  }
  return seq;
}

}  // namespace percept::ttscore
