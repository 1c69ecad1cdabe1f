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

#include "sgir/scene_graph.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "sgir/error.h"
#include "sgir/random.h"

namespace sgir {

bool Box::IsValid() const {
  return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
         std::isfinite(y1) && 0.0 <= x0 && x0 < x1 && x1 <= 1.0 &&
         0.0 <= y0 && y0 < y1 && y1 <= 1.0;
}

bool Box::StrictlyContains(const Box& inner) const {
  return x0 < inner.x0 && inner.x1 < x1 && y0 < inner.y0 && inner.y1 < y1;
}

bool Box::Contains(const Box& inner) const {
  return x0 <= inner.x0 && inner.x1 <= x1 && y0 <= inner.y0 && inner.y1 <= y1;
}

void ValidateBox(const Box& box) {
  if (!box.IsValid()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("invalid box ({}, {}, {}, {})", box.x0, box.y0,
                            box.x1, box.y1));
  }
}

double IntersectionOverUnion(const Box& a, const Box& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.Area() + b.Area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Box Superbox(const Box& a, const Box& b) {
  ValidateBox(a);
  ValidateBox(b);
  return Box{std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1),
             std::max(a.y1, b.y1)};
}

namespace {

constexpr std::array<std::string_view, kNumPredicates> kPredicateNames = {
    "left of", "right of", "above", "below", "inside", "surrounding"};

std::string Normalize(std::string_view name) {
  std::string out;
  for (const char c : name) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view PredicateName(Predicate predicate) {
  return kPredicateNames[static_cast<int>(predicate)];
}

std::optional<Predicate> ParsePredicate(std::string_view name) {
  const std::string key = Normalize(name);
  for (int i = 0; i < kNumPredicates; ++i) {
    if (Normalize(kPredicateNames[i]) == key) return static_cast<Predicate>(i);
  }
  return std::nullopt;
}

Predicate PredicateFromIndex(int index) {
  if (index < 0 || index >= kNumPredicates) {
    throw Error(ErrorCode::kIndexOutOfRange,
                fmt::format("predicate index {} not in [0, {})", index,
                            kNumPredicates));
  }
  return static_cast<Predicate>(index);
}

Predicate InversePredicate(Predicate predicate) {
  switch (predicate) {
    case Predicate::kLeftOf: return Predicate::kRightOf;
    case Predicate::kRightOf: return Predicate::kLeftOf;
    case Predicate::kAbove: return Predicate::kBelow;
    case Predicate::kBelow: return Predicate::kAbove;
    case Predicate::kInside: return Predicate::kSurrounding;
    case Predicate::kSurrounding: return Predicate::kInside;
  }
  return predicate;
}

Predicate GeometricPredicate(const Box& subject, const Box& object) {
  ValidateBox(subject);
  ValidateBox(object);
  if (subject == object) {
    throw Error(ErrorCode::kDegenerateGeometry, "identical boxes");
  }
  if (object.StrictlyContains(subject)) return Predicate::kInside;
  if (subject.StrictlyContains(object)) return Predicate::kSurrounding;

  const double dx = object.CenterX() - subject.CenterX();
  const double dy = object.CenterY() - subject.CenterY();
  if (dx == 0.0 && dy == 0.0) {
    throw Error(ErrorCode::kDegenerateGeometry, "coincident box centers");
  }
  if (std::abs(dx) >= std::abs(dy)) {
    return dx > 0.0 ? Predicate::kLeftOf : Predicate::kRightOf;
  }
  return dy > 0.0 ? Predicate::kAbove : Predicate::kBelow;
}

void ValidateSceneGraph(const SceneGraph& graph, int num_classes) {
  const int n = static_cast<int>(graph.objects.size());
  for (int i = 0; i < n; ++i) {
    const ObjectNode& node = graph.objects[i];
    if (node.node_id != i) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("graph '{}': node {} has id {}", graph.image_id,
                              i, node.node_id));
    }
    if (node.class_id < 0 || node.class_id >= num_classes) {
      throw Error(ErrorCode::kUnknownClass,
                  fmt::format("graph '{}': class id {} outside vocabulary of {}",
                              graph.image_id, node.class_id, num_classes));
    }
    ValidateBox(node.box);
  }
  if (!graph.triplets.empty() && n < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("graph '{}': triplets need two objects",
                            graph.image_id));
  }
  std::set<std::pair<int, int>> seen;
  for (const Triplet& t : graph.triplets) {
    if (t.subject_id < 0 || t.subject_id >= n || t.object_id < 0 ||
        t.object_id >= n || t.subject_id == t.object_id) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("graph '{}': bad triplet endpoints ({}, {})",
                              graph.image_id, t.subject_id, t.object_id));
    }
    if (static_cast<int>(t.predicate) >= kNumPredicates) {
      throw Error(ErrorCode::kInvalidArgument, "predicate out of range");
    }
    if (!seen.emplace(t.subject_id, t.object_id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("graph '{}': duplicate pair ({}, {})",
                              graph.image_id, t.subject_id, t.object_id));
    }
  }
}

std::optional<int> ClassVocabulary::Find(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

void ClassVocabulary::Validate() const {
  if (frequencies.size() != names.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocabulary names and frequencies differ in length");
  }
  std::set<std::string_view> unique(names.begin(), names.end());
  if (unique.size() != names.size()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate class names");
  }
  for (const std::int64_t f : frequencies) {
    if (f < 0) throw Error(ErrorCode::kInvalidArgument, "negative frequency");
  }
}

std::uint64_t ClassVocabulary::Hash() const {
  std::uint64_t hash = Fnv1a64("");
  for (const std::string& name : names) {
    hash = Fnv1a64(name, hash);
    hash = Fnv1a64("\n", hash);
  }
  return hash;
}

SceneGraph BuildSceneGraph(const AnnotationRecord& record,
                           const GraphBuildConfig& config) {
  if (config.max_objects < 2 || config.max_triplets < 1 ||
      config.min_box_area < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "bad graph build config");
  }
  std::vector<int> kept;
  for (int i = 0; i < static_cast<int>(record.objects.size()); ++i) {
    const Box& box = record.objects[i].box;
    if (box.IsValid() && box.Area() >= config.min_box_area) kept.push_back(i);
  }
  if (static_cast<int>(kept.size()) > config.max_objects) {
    std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
      return record.objects[a].box.Area() > record.objects[b].box.Area();
    });
    kept.resize(config.max_objects);
    std::sort(kept.begin(), kept.end());
  }
  if (kept.size() < 2) {
    throw Error(ErrorCode::kTooFewObjects,
                fmt::format("record '{}' has {} usable objects",
                            record.image_id, kept.size()));
  }

  SceneGraph graph;
  graph.image_id = record.image_id;
  for (const int src : kept) {
    const int id = static_cast<int>(graph.objects.size());
    graph.objects.push_back(
        ObjectNode{id, record.objects[src].class_id, record.objects[src].box});
  }

  const int n = static_cast<int>(graph.objects.size());
  std::vector<Triplet> candidates;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      try {
        const Predicate p =
            GeometricPredicate(graph.objects[i].box, graph.objects[j].box);
        candidates.push_back(Triplet{i, p, j});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateGeometry) throw;
      }
    }
  }
  if (static_cast<int>(candidates.size()) > config.max_triplets) {
    Rng rng(config.seed ^ Fnv1a64(record.image_id));
    std::vector<int> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order.begin(), order.end());
    order.resize(config.max_triplets);
    std::sort(order.begin(), order.end());
    std::vector<Triplet> chosen;
    chosen.reserve(order.size());
    for (const int k : order) chosen.push_back(candidates[k]);
    candidates = std::move(chosen);
  }
  graph.triplets = std::move(candidates);
  return graph;
}

std::vector<SceneGraph> BuildSceneGraphs(
    std::span<const AnnotationRecord> records, const GraphBuildConfig& config) {
  std::vector<SceneGraph> graphs;
  graphs.reserve(records.size());
  for (const AnnotationRecord& record : records) {
    try {
      graphs.push_back(BuildSceneGraph(record, config));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTooFewObjects) throw;
    }
  }
  return graphs;
}

ClassVocabulary ClassFrequencies(std::span<const SceneGraph> corpus,
                                 std::vector<std::string> names) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot count classes of no scenes");
  }
  ClassVocabulary vocab;
  vocab.frequencies.assign(names.size(), 0);
  vocab.names = std::move(names);
  for (const SceneGraph& graph : corpus) {
    for (const ObjectNode& node : graph.objects) {
      if (node.class_id < 0 || node.class_id >= vocab.size()) {
        throw Error(ErrorCode::kUnknownClass,
                    fmt::format("class id {} outside vocabulary of {}",
                                node.class_id, vocab.size()));
      }
      ++vocab.frequencies[node.class_id];
    }
  }
  return vocab;
}

}  // namespace sgir
