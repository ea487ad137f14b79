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

#include "dataio/manifest.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "common/error.h"

namespace percept::dataio {

namespace {

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> Split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> SplitWhitespace(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void Fail(const std::string& source, int line,
                       const std::string& what) {
  throw DataError(source + ":" + std::to_string(line) + ": " + what);
}

template <typename Fn>
void ForEachLine(const std::string& content, Fn fn) {
  std::istringstream ss(content);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(number, line);
  }
}

}  // namespace

AudioManifest ParseManifest(const std::string& content,
                            const std::string& source_name) {
  AudioManifest manifest;
  std::set<std::string> seen;
  ForEachLine(content, [&](int number, const std::string& line) {
    if (line.empty() || line[0] == '#') return;
    const auto fields = Split(line, '\t');
    if (fields.size() < 3 || fields.size() > 4) {
      Fail(source_name, number,
           "expected 3 or 4 tab-separated fields, found " +
               std::to_string(fields.size()));
    }
    ManifestEntry entry{fields[0], fields[1], fields[2], std::nullopt};
    if (entry.utt_id.empty()) Fail(source_name, number, "empty utt_id");
    if (entry.audio_path.empty()) Fail(source_name, number, "empty audio path");
    if (entry.text.empty()) Fail(source_name, number, "empty text");
    if (fields.size() == 4) {
      auto phones = SplitWhitespace(fields[3]);
      if (phones.empty()) Fail(source_name, number, "empty phone list");
      entry.phones = std::move(phones);
    }
    if (!seen.insert(entry.utt_id).second) {
      Fail(source_name, number, "duplicate utt_id " + entry.utt_id);
    }
    manifest.entries.push_back(std::move(entry));
  });
  return manifest;
}

AudioManifest LoadManifest(const std::filesystem::path& path) {
  AudioManifest manifest = ParseManifest(ReadFile(path), path.string());
  manifest.base_dir = path.parent_path();
  return manifest;
}

void SaveManifest(const AudioManifest& manifest,
                  const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  for (const auto& e : manifest.entries) {
    os << e.utt_id << '\t' << e.audio_path << '\t' << e.text;
    if (e.phones) {
      os << '\t';
      for (size_t i = 0; i < e.phones->size(); ++i) {
        os << (i ? " " : "") << (*e.phones)[i];
      }
    }
    os << '\n';
  }
}

std::string TestKindName(TestKind kind) {
  return kind == TestKind::kNaturalness ? "naturalness" : "intelligibility";
}

std::vector<RatingRecord> ParseRatings(const std::string& content,
                                       const std::string& source_name) {
  std::vector<RatingRecord> records;
  bool header_seen = false;
  ForEachLine(content, [&](int number, const std::string& line) {
    if (line.empty()) return;
    if (!header_seen) {
      if (line != "system_id,utt_id,rater_id,test,score") {
        Fail(source_name, number,
             "expected header system_id,utt_id,rater_id,test,score");
      }
      header_seen = true;
      return;
    }
    const auto f = Split(line, ',');
    if (f.size() != 5) {
      Fail(source_name, number,
           "expected 5 comma-separated fields, found " +
               std::to_string(f.size()));
    }
    RatingRecord r;
    r.system_id = f[0];
    r.utt_id = f[1];
    r.rater_id = f[2];
    if (r.system_id.empty() || r.utt_id.empty() || r.rater_id.empty()) {
      Fail(source_name, number, "empty identifier");
    }
    if (f[3] == "naturalness") {
      r.test = TestKind::kNaturalness;
    } else if (f[3] == "intelligibility") {
      r.test = TestKind::kIntelligibility;
    } else {
      Fail(source_name, number, "unknown test kind '" + f[3] + "'");
    }
    size_t used = 0;
    try {
      r.score = std::stod(f[4], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f[4].size() || !std::isfinite(r.score)) {
      Fail(source_name, number, "malformed score '" + f[4] + "'");
    }
    if (r.test == TestKind::kNaturalness) {
      const double twice = r.score * 2.0;
      if (r.score < 1.0 || r.score > 5.0 || twice != std::round(twice)) {
        Fail(source_name, number,
             "naturalness score " + f[4] + " not in {1.0, 1.5, ..., 5.0}");
      }
    } else if (r.score < 1.0 || r.score > 5.0 ||
               r.score != std::round(r.score)) {
      Fail(source_name, number,
           "intelligibility score " + f[4] + " not in {1, 2, 3, 4, 5}");
    }
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<RatingRecord> LoadRatings(const std::filesystem::path& path) {
  return ParseRatings(ReadFile(path), path.string());
}

void SaveRatings(const std::vector<RatingRecord>& records,
                 const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << "system_id,utt_id,rater_id,test,score\n";
  for (const auto& r : records) {
    std::ostringstream score;
    score << r.score;
    os << r.system_id << ',' << r.utt_id << ',' << r.rater_id << ','
       << TestKindName(r.test) << ',' << score.str() << '\n';
  }
}

std::map<std::string, double> MeanScoreByUtterance(
    const std::vector<RatingRecord>& records, TestKind test) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : records) {
    if (r.test != test) continue;
    auto& [sum, n] = acc[r.utt_id];
    sum += r.score;
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [utt, v] : acc) out[utt] = v.first / v.second;
  return out;
}

}  // namespace percept::dataio
