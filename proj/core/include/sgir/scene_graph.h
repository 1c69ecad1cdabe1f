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

#ifndef SGIR_SCENE_GRAPH_H_
#define SGIR_SCENE_GRAPH_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgir {

// Axis-aligned box in normalized image coordinates; y grows downward.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool IsValid() const;
  double Width() const { return x1 - x0; }
  double Height() const { return y1 - y0; }
  double Area() const { return Width() * Height(); }
  double CenterX() const { return 0.5 * (x0 + x1); }
  double CenterY() const { return 0.5 * (y0 + y1); }
  std::array<double, 4> ToArray() const { return {x0, y0, x1, y1}; }

  // True when `inner` lies within this box with no shared edge.
  bool StrictlyContains(const Box& inner) const;
  // Non-strict containment (edges may touch).
  bool Contains(const Box& inner) const;

  friend bool operator==(const Box&, const Box&) = default;
};

// Throws InvalidArgument when `box` violates the Box invariants.
void ValidateBox(const Box& box);

double IntersectionOverUnion(const Box& a, const Box& b);

// Smallest box enclosing both inputs.
Box Superbox(const Box& a, const Box& b);

// Wire order is fixed: LeftOf=0 ... Surrounding=5.
enum class Predicate : std::uint8_t {
  kLeftOf = 0,
  kRightOf = 1,
  kAbove = 2,
  kBelow = 3,
  kInside = 4,
  kSurrounding = 5,
};

inline constexpr int kNumPredicates = 6;

std::string_view PredicateName(Predicate predicate);
// Accepts "left of", "left_of", "leftof" and "LeftOf" spellings.
std::optional<Predicate> ParsePredicate(std::string_view name);
Predicate PredicateFromIndex(int index);
Predicate InversePredicate(Predicate predicate);

// Geometric relation of `subject` with respect to `object`.
//
// Strict containment is tested first (Inside / Surrounding). Otherwise the
// displacement d = center(object) - center(subject) picks the relation: a
// mostly horizontal d (|dx| >= |dy|) gives LeftOf when the object lies to the
// right and RightOf when it lies to the left; a mostly vertical d gives Above
// when the object lies below and Below when it lies above. This is the
// quadrant partition of atan2(dy, dx) at +-45 and +-135 degrees, with
// diagonal ties going to the horizontal relation so that swapping the
// arguments always yields the inverse predicate.
//
// Throws DegenerateGeometry for identical boxes or coincident centers without
// strict containment.
Predicate GeometricPredicate(const Box& subject, const Box& object);

struct ObjectNode {
  int node_id = 0;
  int class_id = 0;
  Box box;

  friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

struct Triplet {
  int subject_id = 0;
  Predicate predicate = Predicate::kLeftOf;
  int object_id = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct SceneGraph {
  std::string image_id;
  std::vector<ObjectNode> objects;
  std::vector<Triplet> triplets;

  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

// Checks node ids, class range, boxes, triplet endpoints and pair uniqueness.
// Throws InvalidArgument (or UnknownClass for out-of-range class ids).
void ValidateSceneGraph(const SceneGraph& graph, int num_classes);

struct ClassVocabulary {
  std::vector<std::string> names;
  std::vector<std::int64_t> frequencies;

  int size() const { return static_cast<int>(names.size()); }
  std::optional<int> Find(std::string_view name) const;
  void Validate() const;
  // FNV-1a over the newline-joined class names.
  std::uint64_t Hash() const;
};

struct AnnotatedObject {
  int class_id = 0;
  Box box;

  friend bool operator==(const AnnotatedObject&, const AnnotatedObject&) =
      default;
};

struct AnnotationRecord {
  std::string image_id;
  std::vector<AnnotatedObject> objects;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) =
      default;
};

struct GraphBuildConfig {
  int max_objects = 8;
  double min_box_area = 0.001;
  int max_triplets = 8;
  std::uint64_t seed = 0;
};

// Filters objects (min area, largest `max_objects` kept in original order),
// then emits one triplet per ordered pair i<j, subsampled with a seeded RNG
// when more than `max_triplets` pairs exist. Pairs with degenerate geometry
// are dropped. Throws TooFewObjects when fewer than two objects survive.
SceneGraph BuildSceneGraph(const AnnotationRecord& record,
                           const GraphBuildConfig& config);

// Builds every record that has at least two usable objects; records that do
// not are skipped.
std::vector<SceneGraph> BuildSceneGraphs(
    std::span<const AnnotationRecord> records, const GraphBuildConfig& config);

// Per-class instance counts over a graph corpus. Throws EmptyCorpus.
ClassVocabulary ClassFrequencies(std::span<const SceneGraph> corpus,
                                 std::vector<std::string> names);

}  // namespace sgir

#endif  // SGIR_SCENE_GRAPH_H_
