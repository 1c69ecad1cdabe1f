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

#include "sgir/grad_check.h"
#include "sgir/layout.h"
#include "sgir/random.h"
#include "test_support.h"

namespace sgir {
namespace {

using testing::B;
using testing::ThreeObjectGraph;
using testing::TinyConfig;

// Pixel centers (i + 0.5) / 64 inside [lo, hi): closed-form count.
int CentersIn(double lo, double hi) {
  return static_cast<int>(std::ceil(hi * 64 - 0.5) - std::ceil(lo * 64 - 0.5));
}

TEST(RasterizeTest, CountsMatchClosedForm) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    auto box = [&] {
      double x0 = rng.Uniform(0, 0.7), y0 = rng.Uniform(0, 0.7);
      return B(x0, y0, x0 + rng.Uniform(0.1, 0.3), y0 + rng.Uniform(0.1, 0.3));
    };
    const Box s = box(), o = box();
    const auto labels = RasterizeTripletMask(s, o);
    ASSERT_EQ(labels.size(), 64u * 64u);
    int subj = 0, obj = 0;
    for (const int l : labels) {
      subj += l == kSubjectPixel;
      obj += l == kObjectPixel;
    }
    const int s_count = CentersIn(s.x0, s.x1) * CentersIn(s.y0, s.y1);
    const int o_count = CentersIn(o.x0, o.x1) * CentersIn(o.y0, o.y1);
    const double ix0 = std::max(s.x0, o.x0), ix1 = std::min(s.x1, o.x1);
    const double iy0 = std::max(s.y0, o.y0), iy1 = std::min(s.y1, o.y1);
    const int overlap = (ix0 < ix1 && iy0 < iy1)
                            ? std::max(0, CentersIn(ix0, ix1)) * std::max(0, CentersIn(iy0, iy1))
                            : 0;
    EXPECT_EQ(obj, o_count);
    EXPECT_EQ(subj, s_count - overlap);
  }
}

TEST(RasterizeTest, QuadrantsAndOverride) {
  const auto labels = RasterizeTripletMask(B(0, 0, 0.5, 0.5), B(0.25, 0.25, 1.0, 1.0));
  // Row-major: index = y * 64 + x.
  EXPECT_EQ(labels[0], kSubjectPixel);
  EXPECT_EQ(labels[20 * 64 + 20], kObjectPixel);
  EXPECT_EQ(labels[63 * 64 + 63], kObjectPixel);
  EXPECT_EQ(labels[5 * 64 + 60], kBackgroundPixel);
  EXPECT_EQ(labels[60 * 64 + 5], kBackgroundPixel);
}

TEST(RasterizeTest, TinyBoxClaimsCenterPixel) {
  const auto labels = RasterizeTripletMask(B(0.5, 0.5, 0.505, 0.505), B(0.0, 0.0, 0.1, 0.1));
  int subj = 0;
  for (const int l : labels) subj += l == kSubjectPixel;
  EXPECT_EQ(subj, 1);
  EXPECT_EQ(labels[32 * 64 + 32], kSubjectPixel);
}

TEST(RasterizeTest, TargetsFollowGraph) {
  const SceneGraph g = ThreeObjectGraph();
  const LayoutTargets t = RasterizeTargets(g);
  EXPECT_EQ(t.boxes.shape(), (std::vector<std::int64_t>{3, 4}));
  EXPECT_EQ(BoxFromRow(t.boxes, 1), g.objects[1].box);
  EXPECT_EQ(t.object_masks.shape(), (std::vector<std::int64_t>{3, 256}));
  for (const double m : t.object_masks.data()) EXPECT_EQ(m, 1.0);
  EXPECT_EQ(t.triplet_mask_labels.size(), 2u * 4096u);
  EXPECT_EQ(BoxFromRow(t.superboxes, 0), Superbox(g.objects[0].box, g.objects[1].box));
  EXPECT_EQ(BoxFromRow(t.superboxes, 1), g.objects[1].box);
  const std::vector<int> second(t.triplet_mask_labels.begin() + 4096,
                                t.triplet_mask_labels.end());
  EXPECT_EQ(second, RasterizeTripletMask(g.objects[2].box, g.objects[1].box));
}

void ZeroHeads(ParamStore& store) {
  for (auto& [name, entry] : store.mutable_entries()) {
    if (name.rfind("head.", 0) == 0) entry.value.SetZero();
  }
}

TEST(LayoutHeadsTest, ShapesAndValidBoxes) {
  const ModelConfig c = TinyConfig(3);
  ParamStore store(3);
  InitModelParams(store, c);
  const SceneGraph g = ThreeObjectGraph();
  Tape tape;
  const EmbeddingSet e = EncodeGraph(tape, g, store, c);
  const LayoutPrediction p = PredictLayout(tape, store, c, e, true);
  EXPECT_EQ(p.boxes.value().shape(), (std::vector<std::int64_t>{3, 4}));
  EXPECT_EQ(p.mask_logits.value().shape(), (std::vector<std::int64_t>{3, 256}));
  EXPECT_EQ(p.triplet_mask_logits.value().shape(), (std::vector<std::int64_t>{2, 12288}));
  EXPECT_EQ(p.superboxes.value().shape(), (std::vector<std::int64_t>{2, 4}));
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(BoxFromRow(p.boxes.value(), i).IsValid());
  for (int i = 0; i < 2; ++i) EXPECT_TRUE(BoxFromRow(p.superboxes.value(), i).IsValid());
  const LayoutPrediction q = PredictLayout(tape, store, c, e, false);
  EXPECT_FALSE(q.has_triplet_heads);
  EXPECT_FALSE(q.superboxes.valid());
}

TEST(LossTest, ZeroHeadsGiveClosedFormLosses) {
  const ModelConfig c = TinyConfig(3);
  ParamStore store(3);
  InitModelParams(store, c);
  ZeroHeads(store);
  const SceneGraph g = ThreeObjectGraph();
  const LayoutTargets targets = RasterizeTargets(g);
  Tape tape;
  const EmbeddingSet e = EncodeGraph(tape, g, store, c);
  const LayoutPrediction p = PredictLayout(tape, store, c, e, true);
  const LossWeights w{2.0, 0.5, 0.25, 3.0};
  const LossTerms loss = ComputeLosses(p, targets, w);

  // Zero heads predict the box (0.5, 0.5, 0.75, 0.75) and all-zero logits.
  const double pred[4] = {0.5, 0.5, 0.75, 0.75};
  auto l2 = [&](const std::vector<Box>& boxes) {
    double s = 0;
    for (const Box& b : boxes) {
      const auto a = b.ToArray();
      for (int k = 0; k < 4; ++k) s += (pred[k] - a[k]) * (pred[k] - a[k]);
    }
    return s / (4.0 * boxes.size());
  };
  const double l_box = l2({g.objects[0].box, g.objects[1].box, g.objects[2].box});
  const double l_sbox = l2({Superbox(g.objects[0].box, g.objects[1].box),
                            Superbox(g.objects[2].box, g.objects[1].box)});
  const LossBreakdown& b = loss.breakdown;
  EXPECT_NEAR(b.l_box, l_box, 1e-15);
  EXPECT_NEAR(b.l_mask, std::log(2.0), 1e-12);
  EXPECT_NEAR(b.l_triplet_mask, std::log(3.0), 1e-12);
  EXPECT_NEAR(b.l_triplet_superbox, l_sbox, 1e-15);
  EXPECT_NEAR(b.total, 2 * l_box + 0.5 * std::log(2.0) + 0.25 * std::log(3.0) + 3 * l_sbox,
              1e-12);
  EXPECT_EQ(loss.total.value().scalar(), b.total);
  EXPECT_EQ(b.weights, w);
}

TEST(LossTest, NoTripletAndNoTripletsDropTerms) {
  const ModelConfig c = TinyConfig(3);
  ParamStore store(3);
  InitModelParams(store, c);
  SceneGraph g = ThreeObjectGraph();
  Tape tape;
  const EmbeddingSet e = EncodeGraph(tape, g, store, c);
  const LayoutTargets targets = RasterizeTargets(g);
  const LossTerms nt = ComputeLosses(PredictLayout(tape, store, c, e, false), targets,
                                     LossWeights::NoTriplet());
  EXPECT_EQ(nt.breakdown.l_triplet_mask, 0.0);
  EXPECT_EQ(nt.breakdown.l_triplet_superbox, 0.0);
  EXPECT_NEAR(nt.breakdown.total, nt.breakdown.l_box + 0.1 * nt.breakdown.l_mask, 1e-15);
  EXPECT_FALSE(LossWeights::NoTriplet().UsesTripletHeads());

  g.triplets.clear();
  Tape t2;
  const EmbeddingSet e2 = EncodeGraph(t2, g, store, c);
  const LossTerms none =
      ComputeLosses(PredictLayout(t2, store, c, e2, true), RasterizeTargets(g), LossWeights{});
  EXPECT_EQ(none.breakdown.l_triplet_mask, 0.0);
  EXPECT_TRUE(std::isfinite(none.breakdown.total));
}

TEST(LossTest, ShapeMismatch) {
  const ModelConfig c = TinyConfig(3);
  ParamStore store(3);
  InitModelParams(store, c);
  const SceneGraph g = ThreeObjectGraph();
  SceneGraph other = g;
  other.objects.pop_back();
  other.triplets.pop_back();
  Tape tape;
  const EmbeddingSet e = EncodeGraph(tape, g, store, c);
  EXPECT_SGIR_ERROR(ComputeLosses(PredictLayout(tape, store, c, e, true),
                                  RasterizeTargets(other), LossWeights{}),
                    ErrorCode::kShapeMismatch);
}

TEST(LossTest, WeightsJsonRoundTrip) {
  const LossWeights w{0.5, 0.25, 2.0, 0.0};
  EXPECT_EQ(LossWeightsFromJson(LossWeightsToJson(w)), w);
}

TEST(MetricsTest, PerfectAndKnownAccuracy) {
  const SceneGraph g = ThreeObjectGraph();
  const LayoutTargets t = RasterizeTargets(g);
  // Logits favour the true label everywhere except the first 100 pixels.
  Tensor logits = Tensor::Matrix(2, 4096 * 3);
  for (std::size_t p = 0; p < t.triplet_mask_labels.size(); ++p) {
    const int label = p < 100 ? (t.triplet_mask_labels[p] + 1) % 3 : t.triplet_mask_labels[p];
    logits[static_cast<std::int64_t>(p) * 3 + label] = 1.0;
  }
  LayoutMetricsAccumulator acc;
  acc.Add(t.boxes, t.boxes, t.superboxes, t.superboxes, logits, t.triplet_mask_labels);
  const LayoutMetrics m = acc.Result();
  EXPECT_DOUBLE_EQ(m.mean_box_iou, 1.0);
  EXPECT_DOUBLE_EQ(m.mean_superbox_iou, 1.0);
  EXPECT_DOUBLE_EQ(m.triplet_mask_accuracy, (8192.0 - 100.0) / 8192.0);
  EXPECT_EQ(m.num_objects, 3);
  EXPECT_EQ(m.num_triplets, 2);
}

TEST(LayoutGradTest, FullModelGradCheck) {
  const ModelConfig c = TinyConfig(3);
  ParamStore store(12);
  InitModelParams(store, c);
  const SceneGraph g = ThreeObjectGraph();
  const LayoutTargets targets = RasterizeTargets(g);
  const GradCheckResult r = GradCheck(
      [&](Tape& tape) {
        const EmbeddingSet e = EncodeGraph(tape, g, store, c);
        return ComputeLosses(PredictLayout(tape, store, c, e, true), targets, LossWeights{})
            .total;
      },
      store, GradCheckOptions{.max_coordinates = 400});
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "]";
  EXPECT_GE(r.checked, 300);
}

}  // namespace
}  // namespace sgir
