// Copyright 2026 The SGIR Authors.
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

#ifndef SGIR_CORPUS_IO_H_
#define SGIR_CORPUS_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgir/scene_graph.h"

namespace sgir {

// One graph per JSON Lines row:
//   {"image_id": str, "objects": [{"class": int, "box": [x0,y0,x1,y1]}],
//    "triplets": [[subject_index, predicate_index, object_index]]}
nlohmann::json SceneGraphToJson(const SceneGraph& graph);
SceneGraph SceneGraphFromJson(const nlohmann::json& row);

std::string SerializeGraphCorpus(std::span<const SceneGraph> graphs);
std::vector<SceneGraph> ParseGraphCorpus(const std::string& text);

void WriteGraphCorpus(const std::filesystem::path& path,
                      std::span<const SceneGraph> graphs);
std::vector<SceneGraph> ReadGraphCorpus(const std::filesystem::path& path);

// {"names": [...], "frequencies": [...]}
nlohmann::json VocabularyToJson(const ClassVocabulary& vocab);
ClassVocabulary VocabularyFromJson(const nlohmann::json& doc);
void WriteVocabulary(const std::filesystem::path& path,
                     const ClassVocabulary& vocab);
ClassVocabulary ReadVocabulary(const std::filesystem::path& path);

std::string ReadTextFile(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace sgir

#endif  // SGIR_CORPUS_IO_H_
