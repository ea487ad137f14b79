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

#ifndef PERCEPT_EVALKIT_PER_H_
#define PERCEPT_EVALKIT_PER_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace percept::evalkit {

using PhoneSequence = std::vector<std::string>;

// Levenshtein distance with unit substitution, insertion and deletion costs.
int EditDistance(const PhoneSequence& ref, const PhoneSequence& hyp);

// 100 * EditDistance / |ref|. Throws DataError on an empty reference.
double Per(const PhoneSequence& ref, const PhoneSequence& hyp);

enum class SentenceClass { kLong, kShort };
std::string SentenceClassName(SentenceClass c);

struct PerPair {
  std::string utt_id;
  PhoneSequence ref;
  PhoneSequence hyp;
  SentenceClass sentence_class = SentenceClass::kShort;
};

struct PerCounts {
  long edits = 0;
  long ref_phones = 0;
  int pairs = 0;
};

// Corpus-level pooling within each class; a class without pairs is absent.
struct PerResult {
  std::optional<double> long_per;
  std::optional<double> short_per;
  std::optional<double> overall_per;
  PerCounts long_counts;
  PerCounts short_counts;
};

PerResult PerBreakdown(const std::vector<PerPair>& pairs);

// "utt_id<TAB>space-separated phones" per line.
std::map<std::string, PhoneSequence> LoadPhoneFile(
    const std::filesystem::path& path);
// "utt_id<TAB>long|short" per line.
std::map<std::string, SentenceClass> LoadClassFile(
    const std::filesystem::path& path);

// Joins references, hypotheses and classes on utt_id. Every reference needs a
// hypothesis and a class.
std::vector<PerPair> JoinPerInputs(
    const std::map<std::string, PhoneSequence>& refs,
    const std::map<std::string, PhoneSequence>& hyps,
    const std::map<std::string, SentenceClass>& classes);

}  // namespace percept::evalkit

#endif  // PERCEPT_EVALKIT_PER_H_
