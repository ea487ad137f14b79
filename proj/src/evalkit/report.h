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

#ifndef PERCEPT_EVALKIT_REPORT_H_
#define PERCEPT_EVALKIT_REPORT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dataio/types.h"
#include "evalkit/per.h"
#include "evalkit/stats.h"

namespace percept::evalkit {

struct SystemReport {
  std::string system_id;
  std::optional<MosSummary> naturalness;
  std::optional<ScoreHistogram> intelligibility;
  std::optional<double> fcr;
  std::optional<double> tmsr;
  std::optional<PerResult> per;
};

struct PairwiseTest {
  std::string system_a;
  std::string system_b;
  dataio::TestKind test = dataio::TestKind::kNaturalness;
  int n = 0;                       // utterances rated for both systems
  std::optional<double> p_value;   // absent below two pairs or zero variance
};

struct MetricReport {
  std::vector<SystemReport> systems;  // sorted by system_id
  std::vector<PairwiseTest> comparisons;
};

// Aggregates ratings per system and attaches PER results by system id.
// Paired tests compare per-utterance mean scores on shared utt_ids.
MetricReport BuildReport(const std::vector<dataio::RatingRecord>& ratings,
                         const std::map<std::string, PerResult>& per);

// "49.4%" style formatting of a ratio.
std::string FormatPercent(double ratio, int decimals = 1);

// One "[system <id>]" section per system with key = value lines, then one
// "[compare <a> <b>]" section per pair. Absent values print as "n/a".
std::string FormatReport(const MetricReport& report);
void WriteReport(const MetricReport& report,
                 const std::filesystem::path& path);

}  // namespace percept::evalkit

#endif  // PERCEPT_EVALKIT_REPORT_H_
