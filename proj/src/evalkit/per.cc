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

#include "evalkit/per.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "common/error.h"

namespace percept::evalkit {

int EditDistance(const PhoneSequence& ref, const PhoneSequence& hyp) {
  std::vector<int> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (size_t j = 0; j <= hyp.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= hyp.size(); ++j) {
      const int sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

double Per(const PhoneSequence& ref, const PhoneSequence& hyp) {
  if (ref.empty()) throw DataError("PER needs a non-empty reference");
  return 100.0 * EditDistance(ref, hyp) / static_cast<double>(ref.size());
}

std::string SentenceClassName(SentenceClass c) {
  return c == SentenceClass::kLong ? "long" : "short";
}

PerResult PerBreakdown(const std::vector<PerPair>& pairs) {
  PerResult r;
  for (const auto& p : pairs) {
    if (p.ref.empty()) {
      throw DataError("empty reference for utterance " + p.utt_id);
    }
    PerCounts& c = p.sentence_class == SentenceClass::kLong ? r.long_counts
                                                            : r.short_counts;
    c.edits += EditDistance(p.ref, p.hyp);
    c.ref_phones += static_cast<long>(p.ref.size());
    ++c.pairs;
  }
  auto rate = [](long edits, long phones) -> std::optional<double> {
    if (phones == 0) return std::nullopt;
    return 100.0 * static_cast<double>(edits) / static_cast<double>(phones);
  };
  r.long_per = rate(r.long_counts.edits, r.long_counts.ref_phones);
  r.short_per = rate(r.short_counts.edits, r.short_counts.ref_phones);
  r.overall_per = rate(r.long_counts.edits + r.short_counts.edits,
                       r.long_counts.ref_phones + r.short_counts.ref_phones);
  return r;
}

namespace {

// Calls `fn(line_number, utt_id, rest)` for every non-empty line.
template <typename Fn>
void ForEachTabLine(const std::filesystem::path& path, Fn fn) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError(path.string() + ":" + std::to_string(number) +
                      ": expected utt_id<TAB>value");
    }
    fn(number, line.substr(0, tab), line.substr(tab + 1));
  }
}

std::string Where(const std::filesystem::path& path, int line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::map<std::string, PhoneSequence> LoadPhoneFile(
    const std::filesystem::path& path) {
  std::map<std::string, PhoneSequence> out;
  ForEachTabLine(path, [&](int line, const std::string& id,
                           const std::string& rest) {
    std::istringstream fields(rest);
    PhoneSequence phones;
    std::string p;
    while (fields >> p) phones.push_back(p);
    if (!out.emplace(id, std::move(phones)).second) {
      throw DataError(Where(path, line) + "duplicate utt_id '" + id + "'");
    }
  });
  return out;
}

std::map<std::string, SentenceClass> LoadClassFile(
    const std::filesystem::path& path) {
  std::map<std::string, SentenceClass> out;
  ForEachTabLine(path, [&](int line, const std::string& id,
                           const std::string& rest) {
    SentenceClass c;
    if (rest == "long") {
      c = SentenceClass::kLong;
    } else if (rest == "short") {
      c = SentenceClass::kShort;
    } else {
      throw DataError(Where(path, line) + "class must be long or short");
    }
    if (!out.emplace(id, c).second) {
      throw DataError(Where(path, line) + "duplicate utt_id '" + id + "'");
    }
  });
  return out;
}

std::vector<PerPair> JoinPerInputs(
    const std::map<std::string, PhoneSequence>& refs,
    const std::map<std::string, PhoneSequence>& hyps,
    const std::map<std::string, SentenceClass>& classes) {
  std::vector<PerPair> pairs;
  for (const auto& [id, ref] : refs) {
    const auto h = hyps.find(id);
    if (h == hyps.end()) throw DataError("no hypothesis for utterance " + id);
    const auto c = classes.find(id);
    if (c == classes.end()) throw DataError("no class for utterance " + id);
    pairs.push_back({id, ref, h->second, c->second});
  }
  return pairs;
}

}  // namespace percept::evalkit
