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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "sgir/random.h"
#include "sgir/scene_graph.h"
#include "test_support.h"

namespace sgir {
namespace {

using testing::B;

TEST(BoxTest, Validity) {
  EXPECT_TRUE(B(0, 0, 1, 1).IsValid());
  EXPECT_FALSE(B(0.5, 0, 0.5, 1).IsValid());
  EXPECT_FALSE(B(0, 0, 1.01, 1).IsValid());
  EXPECT_FALSE(B(-0.1, 0, 0.5, 1).IsValid());
  EXPECT_FALSE(B(0, 0, NAN, 1).IsValid());
  EXPECT_SGIR_ERROR(ValidateBox(B(0.6, 0, 0.5, 1)), ErrorCode::kInvalidArgument);
}

TEST(BoxTest, Containment) {
  const Box outer = B(0.1, 0.1, 0.9, 0.9);
  EXPECT_TRUE(outer.StrictlyContains(B(0.2, 0.2, 0.8, 0.8)));
  EXPECT_FALSE(outer.StrictlyContains(B(0.1, 0.2, 0.8, 0.8)));  // shared edge
  EXPECT_TRUE(outer.Contains(B(0.1, 0.2, 0.8, 0.8)));
  EXPECT_FALSE(outer.StrictlyContains(outer));
}

// Counts unit cells of a 32x32 grid; boxes below have corners on that grid.
double GridIou(const Box& a, const Box& b) {
  int inter = 0, uni = 0;
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) {
      const double x = (i + 0.5) / 32, y = (j + 0.5) / 32;
      const bool in_a = a.x0 <= x && x < a.x1 && a.y0 <= y && y < a.y1;
      const bool in_b = b.x0 <= x && x < b.x1 && b.y0 <= y && y < b.y1;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

TEST(BoxTest, IouMatchesCellCounting) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    auto interval = [&](double& lo, double& hi) {
      const auto a = rng.UniformInt(32);
      const auto b = a + 1 + rng.UniformInt(32 - a);
      lo = a / 32.0;
      hi = b / 32.0;
    };
    auto box = [&] {
      Box out;
      interval(out.x0, out.x1);
      interval(out.y0, out.y1);
      return out;
    };
    const Box a = box(), b = box();
    EXPECT_NEAR(IntersectionOverUnion(a, b), GridIou(a, b), 1e-12);
  }
}

TEST(BoxTest, SuperboxEnclosesBoth) {
  EXPECT_EQ(Superbox(B(0.1, 0.5, 0.2, 0.6), B(0.3, 0.2, 0.4, 0.55)),
            B(0.1, 0.2, 0.4, 0.6));
}

TEST(PredicateTest, NamesRoundTrip) {
  for (int i = 0; i < kNumPredicates; ++i) {
    const Predicate p = PredicateFromIndex(i);
    EXPECT_EQ(static_cast<int>(p), i);
    EXPECT_EQ(ParsePredicate(PredicateName(p)), p);
  }
  EXPECT_EQ(ParsePredicate("LeftOf"), Predicate::kLeftOf);
  EXPECT_EQ(ParsePredicate("right_of"), Predicate::kRightOf);
  EXPECT_EQ(ParsePredicate("SURROUNDING"), Predicate::kSurrounding);
  EXPECT_FALSE(ParsePredicate("near").has_value());
  EXPECT_SGIR_ERROR(PredicateFromIndex(6), ErrorCode::kIndexOutOfRange);
}

TEST(PredicateTest, InversePairs) {
  EXPECT_EQ(InversePredicate(Predicate::kLeftOf), Predicate::kRightOf);
  EXPECT_EQ(InversePredicate(Predicate::kAbove), Predicate::kBelow);
  EXPECT_EQ(InversePredicate(Predicate::kInside), Predicate::kSurrounding);
  for (int i = 0; i < kNumPredicates; ++i) {
    const Predicate p = PredicateFromIndex(i);
    EXPECT_EQ(InversePredicate(InversePredicate(p)), p);
    EXPECT_NE(InversePredicate(p), p);
  }
}

TEST(PredicateTest, HandWorkedCases) {
  // Object centered to the right: subject is left of object.
  EXPECT_EQ(GeometricPredicate(B(0.0, 0.4, 0.2, 0.6), B(0.7, 0.4, 0.9, 0.6)),
            Predicate::kLeftOf);
  EXPECT_EQ(GeometricPredicate(B(0.7, 0.4, 0.9, 0.6), B(0.0, 0.4, 0.2, 0.6)),
            Predicate::kRightOf);
  // Object lower in the image (larger y): subject is above it.
  EXPECT_EQ(GeometricPredicate(B(0.4, 0.0, 0.6, 0.2), B(0.4, 0.7, 0.6, 0.9)),
            Predicate::kAbove);
  EXPECT_EQ(GeometricPredicate(B(0.4, 0.7, 0.6, 0.9), B(0.4, 0.0, 0.6, 0.2)),
            Predicate::kBelow);
  EXPECT_EQ(GeometricPredicate(B(0.3, 0.3, 0.4, 0.4), B(0.1, 0.1, 0.9, 0.9)),
            Predicate::kInside);
  EXPECT_EQ(GeometricPredicate(B(0.1, 0.1, 0.9, 0.9), B(0.3, 0.3, 0.4, 0.4)),
            Predicate::kSurrounding);
  // Overlapping but not contained: falls back to centers.
  EXPECT_EQ(GeometricPredicate(B(0.1, 0.1, 0.5, 0.5), B(0.3, 0.2, 0.8, 0.5)),
            Predicate::kLeftOf);
  // Exact diagonal: horizontal relation wins.
  EXPECT_EQ(GeometricPredicate(B(0.0, 0.0, 0.2, 0.2), B(0.5, 0.5, 0.7, 0.7)),
            Predicate::kLeftOf);
  EXPECT_EQ(GeometricPredicate(B(0.5, 0.5, 0.7, 0.7), B(0.0, 0.0, 0.2, 0.2)),
            Predicate::kRightOf);
}

TEST(PredicateTest, DegenerateGeometry) {
  const Box a = B(0.2, 0.2, 0.4, 0.4);
  EXPECT_SGIR_ERROR(GeometricPredicate(a, a), ErrorCode::kDegenerateGeometry);
  // Concentric, sharing an edge (no strict containment).
  EXPECT_SGIR_ERROR(GeometricPredicate(B(0.25, 0.125, 0.5, 0.625), B(0.25, 0.25, 0.5, 0.5)),
                    ErrorCode::kDegenerateGeometry);
  EXPECT_SGIR_ERROR(GeometricPredicate(B(0.2, 0.2, 0.1, 0.4), a),
                    ErrorCode::kInvalidArgument);
}

// Angle-sector classification computed from atan2, independent of the
// |dx| vs |dy| comparison used by the library. Returns every relation whose
// closed sector contains the direction.
std::set<Predicate> SectorOracle(const Box& s, const Box& o) {
  if (s.x0 > o.x0 && s.y0 > o.y0 && s.x1 < o.x1 && s.y1 < o.y1) {
    return {Predicate::kInside};
  }
  if (o.x0 > s.x0 && o.y0 > s.y0 && o.x1 < s.x1 && o.y1 < s.y1) {
    return {Predicate::kSurrounding};
  }
  const double deg = std::atan2(o.CenterY() - s.CenterY(),
                                o.CenterX() - s.CenterX()) *
                     180.0 / std::numbers::pi;
  std::set<Predicate> out;
  if (std::abs(deg) <= 45.0) out.insert(Predicate::kLeftOf);
  if (std::abs(deg) >= 135.0) out.insert(Predicate::kRightOf);
  if (deg >= 45.0 && deg <= 135.0) out.insert(Predicate::kAbove);
  if (deg >= -135.0 && deg <= -45.0) out.insert(Predicate::kBelow);
  return out;
}

TEST(PredicateTest, MatchesSectorOracleOnRandomPairs) {
  Rng rng(11);
  auto box = [&] {
    double x0 = rng.Uniform(), x1 = rng.Uniform(), y0 = rng.Uniform(),
           y1 = rng.Uniform();
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    return B(x0, y0, x1, y1);
  };
  for (int i = 0; i < 5000; ++i) {
    const Box s = box(), o = box();
    if (!s.IsValid() || !o.IsValid()) continue;
    const Predicate p = GeometricPredicate(s, o);
    const auto allowed = SectorOracle(s, o);
    EXPECT_TRUE(allowed.count(p)) << "pair " << i;
    EXPECT_EQ(GeometricPredicate(o, s), InversePredicate(p));
  }
}

TEST(SceneGraphTest, ValidateRejectsBrokenGraphs) {
  SceneGraph g = testing::ThreeObjectGraph();
  EXPECT_NO_THROW(ValidateSceneGraph(g, 3));
  EXPECT_SGIR_ERROR(ValidateSceneGraph(g, 2), ErrorCode::kUnknownClass);

  SceneGraph bad_id = g;
  bad_id.objects[1].node_id = 7;
  EXPECT_SGIR_ERROR(ValidateSceneGraph(bad_id, 3), ErrorCode::kInvalidArgument);

  SceneGraph self_loop = g;
  self_loop.triplets.push_back({1, Predicate::kAbove, 1});
  EXPECT_SGIR_ERROR(ValidateSceneGraph(self_loop, 3), ErrorCode::kInvalidArgument);

  SceneGraph dangling = g;
  dangling.triplets.push_back({0, Predicate::kAbove, 3});
  EXPECT_SGIR_ERROR(ValidateSceneGraph(dangling, 3), ErrorCode::kInvalidArgument);

  SceneGraph duplicate = g;
  duplicate.triplets.push_back({0, Predicate::kRightOf, 1});
  EXPECT_SGIR_ERROR(ValidateSceneGraph(duplicate, 3), ErrorCode::kInvalidArgument);

  SceneGraph bad_box = g;
  bad_box.objects[0].box = B(0.5, 0.5, 0.4, 0.6);
  EXPECT_SGIR_ERROR(ValidateSceneGraph(bad_box, 3), ErrorCode::kInvalidArgument);
}

AnnotationRecord Record(std::vector<Box> boxes) {
  AnnotationRecord r;
  r.image_id = "img";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    r.objects.push_back({static_cast<int>(i), boxes[i]});
  }
  return r;
}

TEST(BuildSceneGraphTest, AllPairsWithGeometricPredicates) {
  const AnnotationRecord r = Record({B(0.0, 0.0, 0.2, 0.2), B(0.6, 0.0, 0.8, 0.2),
                                     B(0.0, 0.6, 0.2, 0.8)});
  const SceneGraph g = BuildSceneGraph(r, {});
  ASSERT_EQ(g.objects.size(), 3u);
  const std::vector<Triplet> expected = {{0, Predicate::kLeftOf, 1},
                                         {0, Predicate::kAbove, 2},
                                         {1, Predicate::kRightOf, 2}};
  EXPECT_EQ(g.triplets, expected);
  EXPECT_NO_THROW(ValidateSceneGraph(g, 3));
}

TEST(BuildSceneGraphTest, FiltersSmallAndInvalidBoxes) {
  AnnotationRecord r = Record({B(0.0, 0.0, 0.2, 0.2), B(0.5, 0.5, 0.51, 0.51),
                               B(0.6, 0.0, 0.8, 0.2)});
  r.objects.push_back({9, B(0.3, 0.3, 0.2, 0.4)});
  const SceneGraph g = BuildSceneGraph(r, {});
  ASSERT_EQ(g.objects.size(), 2u);
  EXPECT_EQ(g.objects[0].class_id, 0);
  EXPECT_EQ(g.objects[1].class_id, 2);
  EXPECT_EQ(g.objects[1].node_id, 1);
}

TEST(BuildSceneGraphTest, KeepsLargestObjectsInOriginalOrder) {
  std::vector<Box> boxes;
  for (int i = 0; i < 10; ++i) {
    const double side = 0.02 * (i % 5 + 1) + 0.001 * i;
    const double x = 0.09 * i;
    boxes.push_back(B(x, 0.1, x + side, 0.1 + side));
  }
  GraphBuildConfig config;
  config.max_objects = 4;
  config.max_triplets = 100;
  const SceneGraph g = BuildSceneGraph(Record(boxes), config);
  // Sides by index: 0.02,0.041,0.062,0.083,0.104,0.025,0.046,0.067,0.088,0.109
  std::vector<int> kept;
  for (const ObjectNode& n : g.objects) kept.push_back(n.class_id);
  EXPECT_EQ(kept, (std::vector<int>{3, 4, 8, 9}));
  EXPECT_EQ(g.triplets.size(), 6u);
}

TEST(BuildSceneGraphTest, TooFewObjects) {
  EXPECT_SGIR_ERROR(BuildSceneGraph(Record({B(0, 0, 0.5, 0.5)}), {}),
                    ErrorCode::kTooFewObjects);
  const std::vector<AnnotationRecord> records = {
      Record({B(0, 0, 0.5, 0.5)}), Record({B(0, 0, 0.3, 0.3), B(0.5, 0, 0.8, 0.3)})};
  EXPECT_EQ(BuildSceneGraphs(records, {}).size(), 1u);
}

TEST(BuildSceneGraphTest, SubsamplingIsSeededSubsetInPairOrder) {
  std::vector<Box> boxes;
  for (int i = 0; i < 6; ++i) {
    boxes.push_back(B(0.15 * i, 0.05 * i, 0.15 * i + 0.1, 0.05 * i + 0.1));
  }
  const AnnotationRecord r = Record(boxes);
  GraphBuildConfig all;
  all.max_triplets = 100;
  const SceneGraph full = BuildSceneGraph(r, all);
  ASSERT_EQ(full.triplets.size(), 15u);

  GraphBuildConfig capped;
  capped.max_triplets = 5;
  capped.seed = 42;
  const SceneGraph a = BuildSceneGraph(r, capped);
  const SceneGraph b = BuildSceneGraph(r, capped);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.triplets.size(), 5u);
  std::size_t cursor = 0;
  for (const Triplet& t : a.triplets) {
    while (cursor < full.triplets.size() && !(full.triplets[cursor] == t)) ++cursor;
    ASSERT_LT(cursor, full.triplets.size()) << "not an ordered subset";
    ++cursor;
  }
  bool any_differs = false;
  for (std::uint64_t seed = 0; seed < 10 && !any_differs; ++seed) {
    capped.seed = seed;
    any_differs = !(BuildSceneGraph(r, capped) == a);
  }
  EXPECT_TRUE(any_differs);
}

TEST(VocabularyTest, FrequenciesAndLookup) {
  const std::vector<SceneGraph> corpus = {testing::ThreeObjectGraph(),
                                          testing::ThreeObjectGraph()};
  ClassVocabulary v = ClassFrequencies(corpus, {"a", "b", "c", "d"});
  EXPECT_EQ(v.frequencies, (std::vector<std::int64_t>{2, 2, 2, 0}));
  EXPECT_EQ(v.Find("c"), 2);
  EXPECT_FALSE(v.Find("z").has_value());
  EXPECT_SGIR_ERROR(ClassFrequencies({}, {"a"}), ErrorCode::kEmptyCorpus);
  EXPECT_SGIR_ERROR(ClassFrequencies(corpus, {"a", "b"}), ErrorCode::kUnknownClass);
}

TEST(VocabularyTest, HashIsFnvOfNewlineTerminatedNames) {
  ClassVocabulary v;
  v.names = {"cat", "dog"};
  v.frequencies = {1, 1};
  // FNV-1a 64 reference loop over the bytes "cat\ndog\n".
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : std::string("cat\ndog\n")) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  EXPECT_EQ(v.Hash(), h);
  ClassVocabulary w = v;
  w.names = {"catd", "og"};
  EXPECT_NE(v.Hash(), w.Hash());
}

TEST(RandomTest, FnvKnownVectors) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(RandomTest, UniformIntIsUnbiasedAndInRange) {
  Rng rng(5);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.UniformInt(7)];
  for (const int c : counts) EXPECT_NEAR(c, n / 7.0, 5 * std::sqrt(n / 7.0));
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.Uniform(), b.Uniform());
}

TEST(RandomTest, NormalMoments) {
  Rng rng(17);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.Normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.015);
}

}  // namespace
}  // namespace sgir
