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

#include "evalkit/report.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.h"
#include "dataio/manifest.h"

namespace percept::evalkit {

namespace {

using dataio::RatingRecord;
using dataio::TestKind;

std::string Fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string Scientific(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// system -> utt -> mean score for one test.
std::map<std::string, std::map<std::string, double>> UtteranceMeans(
    const std::vector<RatingRecord>& ratings, TestKind test) {
  std::map<std::string, std::map<std::string, std::pair<double, int>>> acc;
  for (const auto& r : ratings) {
    if (r.test != test) continue;
    auto& slot = acc[r.system_id][r.utt_id];
    slot.first += r.score;
    slot.second += 1;
  }
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& [sys, utts] : acc) {
    for (const auto& [utt, sum] : utts) out[sys][utt] = sum.first / sum.second;
  }
  return out;
}

void AddComparisons(const std::vector<RatingRecord>& ratings, TestKind test,
                    std::vector<PairwiseTest>* out) {
  const auto means = UtteranceMeans(ratings, test);
  for (auto a = means.begin(); a != means.end(); ++a) {
    for (auto b = std::next(a); b != means.end(); ++b) {
      std::vector<double> xa, xb;
      for (const auto& [utt, score] : a->second) {
        auto it = b->second.find(utt);
        if (it == b->second.end()) continue;
        xa.push_back(score);
        xb.push_back(it->second);
      }
      PairwiseTest t;
      t.system_a = a->first;
      t.system_b = b->first;
      t.test = test;
      t.n = static_cast<int>(xa.size());
      if (t.n >= 2) t.p_value = PairedTTest(xa, xb);
      out->push_back(t);
    }
  }
}

std::string OptPercent(const std::optional<double>& v, int decimals) {
  return v ? FormatPercent(*v, decimals) : "n/a";
}

std::string OptPer(const std::optional<double>& v) {
  return v ? Fixed(*v, 2) + "%" : "n/a";
}

}  // namespace

MetricReport BuildReport(const std::vector<RatingRecord>& ratings,
                         const std::map<std::string, PerResult>& per) {
  std::map<std::string, std::vector<double>> nat, intel;
  std::set<std::string> ids;
  for (const auto& r : ratings) {
    ids.insert(r.system_id);
    (r.test == TestKind::kNaturalness ? nat : intel)[r.system_id].push_back(
        r.score);
  }
  for (const auto& [id, unused] : per) ids.insert(id);

  MetricReport report;
  for (const auto& id : ids) {
    SystemReport s;
    s.system_id = id;
    if (auto it = nat.find(id); it != nat.end()) {
      s.naturalness = MosAggregate(it->second);
    }
    if (auto it = intel.find(id); it != intel.end()) {
      s.intelligibility = ScoreHistogram::FromScores(it->second);
      s.fcr = Fcr(*s.intelligibility);
      s.tmsr = Tmsr(*s.intelligibility);
    }
    if (auto it = per.find(id); it != per.end()) s.per = it->second;
    report.systems.push_back(std::move(s));
  }
  AddComparisons(ratings, TestKind::kNaturalness, &report.comparisons);
  AddComparisons(ratings, TestKind::kIntelligibility, &report.comparisons);
  return report;
}

std::string FormatPercent(double ratio, int decimals) {
  return Fixed(100.0 * ratio, decimals) + "%";
}

std::string FormatReport(const MetricReport& report) {
  std::ostringstream os;
  for (const auto& s : report.systems) {
    os << "[system " << s.system_id << "]\n";
    if (s.naturalness) {
      os << "mos = " << Fixed(s.naturalness->mean, 2);
      if (s.naturalness->ci95_halfwidth) {
        os << " +- " << Fixed(*s.naturalness->ci95_halfwidth, 3);
      }
      os << "\nmos_n = " << s.naturalness->n << '\n';
    } else {
      os << "mos = n/a\n";
    }
    if (s.intelligibility) {
      os << "intelligibility_counts =";
      for (long c : s.intelligibility->counts) os << ' ' << c;
      os << "\nfcr = " << OptPercent(s.fcr, 1) << '\n';
      os << "tmsr = " << OptPercent(s.tmsr, 1) << '\n';
    } else {
      os << "fcr = n/a\ntmsr = n/a\n";
    }
    if (s.per) {
      os << "per_long = " << OptPer(s.per->long_per) << '\n';
      os << "per_short = " << OptPer(s.per->short_per) << '\n';
      os << "per_overall = " << OptPer(s.per->overall_per) << '\n';
    } else {
      os << "per_long = n/a\nper_short = n/a\nper_overall = n/a\n";
    }
    os << '\n';
  }
  for (const auto& c : report.comparisons) {
    os << "[compare " << c.system_a << ' ' << c.system_b << "]\n";
    os << "test = " << dataio::TestKindName(c.test) << '\n';
    os << "pairs = " << c.n << '\n';
    os << "p_value = " << (c.p_value ? Scientific(*c.p_value) : "n/a")
       << "\n\n";
  }
  return os.str();
}

void WriteReport(const MetricReport& report,
                 const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << FormatReport(report);
}

}  // namespace percept::evalkit
