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

#ifndef SGIR_DATASET_H_
#define SGIR_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgir/scene_graph.h"

namespace sgir {

// Annotation records plus the category vocabulary they index into.
struct AnnotationSet {
  std::vector<AnnotationRecord> records;
  std::vector<std::string> class_names;
};

// Parses COCO-style JSON (images / annotations / categories). Pixel bboxes
// [x, y, w, h] become normalized corner boxes; category ids are remapped to
// contiguous indices in category-list order. Annotations with missing fields,
// unknown categories or zero area are logged and skipped. Only images with at
// least one usable annotation produce a record. Throws MalformedAnnotation if
// the document cannot be parsed or lacks the top-level structure.
AnnotationSet ParseCocoAnnotations(std::string_view json_text);
AnnotationSet LoadCocoAnnotations(const std::filesystem::path& path);

struct VocabSpec {
  int num_classes = 50;
  double zipf_exponent = 1.0;
  // Optional explicit names; generated when shorter than num_classes.
  std::vector<std::string> names;
};

std::vector<std::string> SyntheticClassNames(const VocabSpec& spec);

// Procedural desk-scale corpus. Each scene holds 2-8 objects whose classes
// follow a Zipf profile over class rank; every class has a preferred location
// and size so layouts carry learnable structure, and some objects are nested
// inside larger ones so all six predicates occur. Deterministic in `seed`.
std::vector<AnnotationRecord> GenerateSyntheticCorpus(std::uint64_t seed,
                                                      int n_scenes,
                                                      const VocabSpec& spec);

}  // namespace sgir

#endif  // SGIR_DATASET_H_
