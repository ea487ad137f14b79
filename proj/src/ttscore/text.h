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

#ifndef PERCEPT_TTSCORE_TEXT_H_
#define PERCEPT_TTSCORE_TEXT_H_

#include <map>
#include <string>
#include <vector>

namespace percept::ttscore {

struct TextSequence {
  std::vector<int> token_ids;
  int length() const { return static_cast<int>(token_ids.size()); }
};

// Character vocabulary over UTF-8 code points. Id 0 is the unknown symbol.
class CharVocabulary {
 public:
  CharVocabulary() = default;
  explicit CharVocabulary(const std::vector<std::string>& symbols);

  static CharVocabulary FromTexts(const std::vector<std::string>& texts);

  // Throws DataError on empty text.
  TextSequence Encode(const std::string& text) const;
  int size() const { return static_cast<int>(symbols_.size()) + 1; }
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::map<std::string, int> index_;
};

// Splits a UTF-8 string into one string per code point.
std::vector<std::string> SplitUtf8(const std::string& text);

}  // namespace percept::ttscore

#endif  // PERCEPT_TTSCORE_TEXT_H_
