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

#ifndef SGIR_LAYOUT_H_
#define SGIR_LAYOUT_H_

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgir/autodiff.h"
#include "sgir/encoder.h"
#include "sgir/param_store.h"
#include "sgir/scene_graph.h"
#include "sgir/tensor.h"

namespace sgir {

inline constexpr int kObjectMaskSize = 16;
inline constexpr int kTripletMaskSize = 64;
inline constexpr int kTripletMaskClasses = 3;  // background, subject, object

enum TripletMaskLabel : int {
  kBackgroundPixel = 0,
  kSubjectPixel = 1,
  kObjectPixel = 2,
};

// Supervision rasterized from boxes for one (possibly batched) graph.
struct LayoutTargets {
  Tensor boxes;                          // [N x 4]
  Tensor object_masks;                   // [N x 256], all ones in box frame
  std::vector<int> triplet_mask_labels;  // T * 64 * 64 labels, row major
  Tensor superboxes;                     // [T x 4]
};

// 64x64 label map in image coordinates. A pixel belongs to a box when its
// center lies in [x0, x1) x [y0, y1); object pixels override subject pixels.
// A box covering no pixel center still claims the pixel holding its center.
std::vector<int> RasterizeTripletMask(const Box& subject, const Box& object);

LayoutTargets RasterizeTargets(const SceneGraph& graph);

struct LayoutPrediction {
  Var boxes;                // [N x 4] valid boxes
  Var mask_logits;          // [N x 256]
  Var triplet_mask_logits;  // [T x 12288], pixel-major then class
  Var superboxes;           // [T x 4]
  bool has_triplet_heads = false;
};

void InitLayoutHeads(ParamStore& store, const ModelConfig& config);

// Box head (squashed to a valid box) and 16x16 mask logits per object row.
std::pair<Var, Var> PredictObjectLayout(Tape& tape, ParamStore& store,
                                        const ModelConfig& config,
                                        Var object_vecs);
// [T x 3d] triplet embeddings to [T x 64*64*3] logits.
Var PredictTripletMask(Tape& tape, ParamStore& store, const ModelConfig& config,
                       Var triplet_embeddings);
// [T x 3d] triplet embeddings to [T x 4] valid superboxes.
Var PredictSuperbox(Tape& tape, ParamStore& store, const ModelConfig& config,
                    Var triplet_embeddings);

LayoutPrediction PredictLayout(Tape& tape, ParamStore& store,
                               const ModelConfig& config,
                               const EmbeddingSet& embeddings,
                               bool with_triplet_heads);

struct LossWeights {
  double box = 1.0;
  double mask = 0.1;
  double triplet_mask = 1.0;
  double triplet_superbox = 1.0;

  static LossWeights NoTriplet() { return {1.0, 0.1, 0.0, 0.0}; }
  bool UsesTripletHeads() const {
    return triplet_mask != 0.0 || triplet_superbox != 0.0;
  }
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossBreakdown {
  double l_box = 0.0;
  double l_mask = 0.0;
  double l_triplet_mask = 0.0;
  double l_triplet_superbox = 0.0;
  double total = 0.0;
  LossWeights weights;
};

nlohmann::json LossWeightsToJson(const LossWeights& w);
LossWeights LossWeightsFromJson(const nlohmann::json& doc);
nlohmann::json LossBreakdownToJson(const LossBreakdown& b);

struct LossTerms {
  Var total;
  LossBreakdown breakdown;
};

// L2 on boxes, binary cross-entropy on object masks, 3-class pixel
// cross-entropy on triplet masks, L2 on superboxes, combined as the weighted
// sum. Triplet terms are 0 when the prediction has no triplet heads or the
// graph has no triplets. Throws ShapeMismatch on mismatched sets.
LossTerms ComputeLosses(const LayoutPrediction& prediction,
                        const LayoutTargets& targets,
                        const LossWeights& weights);

struct LayoutMetrics {
  double mean_box_iou = 0.0;
  double mean_superbox_iou = 0.0;
  double triplet_mask_accuracy = 0.0;
  std::int64_t num_objects = 0;
  std::int64_t num_triplets = 0;
};

nlohmann::json LayoutMetricsToJson(const LayoutMetrics& m);

// Accumulates IoU and per-pixel argmax accuracy over batches.
class LayoutMetricsAccumulator {
 public:
  void Add(const Tensor& predicted_boxes, const Tensor& target_boxes,
           const Tensor& predicted_superboxes, const Tensor& target_superboxes,
           const Tensor& triplet_mask_logits,
           const std::vector<int>& triplet_mask_labels);
  LayoutMetrics Result() const;

 private:
  double box_iou_sum_ = 0.0;
  double superbox_iou_sum_ = 0.0;
  std::int64_t correct_pixels_ = 0;
  std::int64_t total_pixels_ = 0;
  std::int64_t objects_ = 0;
  std::int64_t triplets_ = 0;
};

Box BoxFromRow(const Tensor& boxes, std::int64_t row);

}  // namespace sgir

#endif  // SGIR_LAYOUT_H_
