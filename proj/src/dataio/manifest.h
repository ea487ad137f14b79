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

#ifndef PERCEPT_DATAIO_MANIFEST_H_
#define PERCEPT_DATAIO_MANIFEST_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dataio/types.h"

namespace percept::dataio {

// Tab-separated manifest: utt_id, audio_path, text[, phones]. Lines starting
// with '#' and blank lines are skipped. Errors carry "path:line".
AudioManifest LoadManifest(const std::filesystem::path& path);
AudioManifest ParseManifest(const std::string& content,
                            const std::string& source_name);
void SaveManifest(const AudioManifest& manifest,
                  const std::filesystem::path& path);

// CSV with header system_id,utt_id,rater_id,test,score.
std::vector<RatingRecord> LoadRatings(const std::filesystem::path& path);
std::vector<RatingRecord> ParseRatings(const std::string& content,
                                       const std::string& source_name);
void SaveRatings(const std::vector<RatingRecord>& records,
                 const std::filesystem::path& path);

std::string TestKindName(TestKind kind);

// Mean score per utterance over all raters and systems for one test kind.
std::map<std::string, double> MeanScoreByUtterance(
    const std::vector<RatingRecord>& records, TestKind test);

}  // namespace percept::dataio

#endif  // PERCEPT_DATAIO_MANIFEST_H_
