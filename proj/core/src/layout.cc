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

#include "sgir/layout.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sgir/error.h"
#include "sgir/nn.h"

namespace sgir {
namespace {

constexpr int kObjectMaskPixels = kObjectMaskSize * kObjectMaskSize;
constexpr int kTripletMaskPixels = kTripletMaskSize * kTripletMaskSize;

std::vector<std::int64_t> BoxHeadDims(const ModelConfig& c) {
  return {c.d_embed, c.head_hidden, 4};
}
std::vector<std::int64_t> MaskHeadDims(const ModelConfig& c) {
  return {c.d_embed, c.head_hidden, kObjectMaskPixels};
}
std::vector<std::int64_t> TripletMaskHeadDims(const ModelConfig& c) {
  return {3 * c.d_embed, c.triplet_mask_hidden,
          kTripletMaskPixels * kTripletMaskClasses};
}
std::vector<std::int64_t> SuperboxHeadDims(const ModelConfig& c) {
  return {3 * c.d_embed, c.head_hidden, 4};
}

void Paint(std::vector<int>& labels, const Box& box, int label) {
  bool painted = false;
  for (int py = 0; py < kTripletMaskSize; ++py) {
    const double cy = (py + 0.5) / kTripletMaskSize;
    if (cy < box.y0 || cy >= box.y1) continue;
    for (int px = 0; px < kTripletMaskSize; ++px) {
      const double cx = (px + 0.5) / kTripletMaskSize;
      if (cx < box.x0 || cx >= box.x1) continue;
      labels[py * kTripletMaskSize + px] = label;
      painted = true;
    }
  }
  if (!painted) {
    const int px = std::clamp(static_cast<int>(box.CenterX() * kTripletMaskSize),
                              0, kTripletMaskSize - 1);
    const int py = std::clamp(static_cast<int>(box.CenterY() * kTripletMaskSize),
                              0, kTripletMaskSize - 1);
    labels[py * kTripletMaskSize + px] = label;
  }
}

}  // namespace

std::vector<int> RasterizeTripletMask(const Box& subject, const Box& object) {
  std::vector<int> labels(kTripletMaskPixels, kBackgroundPixel);
  Paint(labels, subject, kSubjectPixel);
  Paint(labels, object, kObjectPixel);
  return labels;
}

LayoutTargets RasterizeTargets(const SceneGraph& graph) {
  const auto n = static_cast<std::int64_t>(graph.objects.size());
  const auto t = static_cast<std::int64_t>(graph.triplets.size());
  LayoutTargets targets;
  targets.boxes = Tensor::Matrix(n, 4);
  targets.object_masks = Tensor::Matrix(n, kObjectMaskPixels);
  for (double& v : targets.object_masks.data()) v = 1.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const Box& b = graph.objects[i].box;
    ValidateBox(b);
    targets.boxes.at(i, 0) = b.x0;
    targets.boxes.at(i, 1) = b.y0;
    targets.boxes.at(i, 2) = b.x1;
    targets.boxes.at(i, 3) = b.y1;
  }
  targets.superboxes = Tensor::Matrix(t, 4);
  targets.triplet_mask_labels.reserve(t * kTripletMaskPixels);
  for (std::int64_t k = 0; k < t; ++k) {
    const Triplet& trip = graph.triplets[k];
    const Box& s = graph.objects.at(trip.subject_id).box;
    const Box& o = graph.objects.at(trip.object_id).box;
    const Box sb = Superbox(s, o);
    targets.superboxes.at(k, 0) = sb.x0;
    targets.superboxes.at(k, 1) = sb.y0;
    targets.superboxes.at(k, 2) = sb.x1;
    targets.superboxes.at(k, 3) = sb.y1;
    const std::vector<int> mask = RasterizeTripletMask(s, o);
    targets.triplet_mask_labels.insert(targets.triplet_mask_labels.end(),
                                       mask.begin(), mask.end());
  }
  return targets;
}

void InitLayoutHeads(ParamStore& store, const ModelConfig& config) {
  InitMlp(store, "head.box", BoxHeadDims(config));
  InitMlp(store, "head.mask", MaskHeadDims(config));
  InitMlp(store, "head.triplet_mask", TripletMaskHeadDims(config));
  InitMlp(store, "head.superbox", SuperboxHeadDims(config));
}

std::pair<Var, Var> PredictObjectLayout(Tape& tape, ParamStore& store,
                                        const ModelConfig& config,
                                        Var object_vecs) {
  Var raw = MlpApply(tape, store, "head.box", object_vecs, BoxHeadDims(config));
  Var mask = MlpApply(tape, store, "head.mask", object_vecs, MaskHeadDims(config));
  return {BoxSquash(raw), mask};
}

Var PredictTripletMask(Tape& tape, ParamStore& store, const ModelConfig& config,
                       Var triplet_embeddings) {
  return MlpApply(tape, store, "head.triplet_mask", triplet_embeddings,
                  TripletMaskHeadDims(config));
}

Var PredictSuperbox(Tape& tape, ParamStore& store, const ModelConfig& config,
                    Var triplet_embeddings) {
  return BoxSquash(MlpApply(tape, store, "head.superbox", triplet_embeddings,
                            SuperboxHeadDims(config)));
}

LayoutPrediction PredictLayout(Tape& tape, ParamStore& store,
                               const ModelConfig& config,
                               const EmbeddingSet& embeddings,
                               bool with_triplet_heads) {
  LayoutPrediction pred;
  std::tie(pred.boxes, pred.mask_logits) =
      PredictObjectLayout(tape, store, config, embeddings.objects);
  if (with_triplet_heads && !embeddings.graph->triplets.empty()) {
    Var trip = TripletEmbeddings(embeddings);
    pred.triplet_mask_logits = PredictTripletMask(tape, store, config, trip);
    pred.superboxes = PredictSuperbox(tape, store, config, trip);
    pred.has_triplet_heads = true;
  }
  return pred;
}

nlohmann::json LossWeightsToJson(const LossWeights& w) {
  return {{"box", w.box},
          {"mask", w.mask},
          {"triplet_mask", w.triplet_mask},
          {"triplet_superbox", w.triplet_superbox}};
}

LossWeights LossWeightsFromJson(const nlohmann::json& doc) {
  LossWeights w;
  w.box = doc.value("box", w.box);
  w.mask = doc.value("mask", w.mask);
  w.triplet_mask = doc.value("triplet_mask", w.triplet_mask);
  w.triplet_superbox = doc.value("triplet_superbox", w.triplet_superbox);
  for (const double v : {w.box, w.mask, w.triplet_mask, w.triplet_superbox}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "loss weights must be >= 0");
    }
  }
  return w;
}

nlohmann::json LossBreakdownToJson(const LossBreakdown& b) {
  return {{"l_box", b.l_box},
          {"l_mask", b.l_mask},
          {"l_triplet_mask", b.l_triplet_mask},
          {"l_triplet_superbox", b.l_triplet_superbox},
          {"total", b.total},
          {"weights", LossWeightsToJson(b.weights)}};
}

LossTerms ComputeLosses(const LayoutPrediction& prediction,
                        const LayoutTargets& targets,
                        const LossWeights& weights) {
  if (prediction.boxes.rows() != targets.boxes.rows() ||
      prediction.mask_logits.rows() != targets.object_masks.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "object predictions vs targets");
  }
  std::vector<Var> terms;
  std::vector<double> w;
  LossTerms out;
  out.breakdown.weights = weights;

  Var l_box = MeanSquaredError(prediction.boxes, targets.boxes);
  Var l_mask =
      SigmoidBinaryCrossEntropy(prediction.mask_logits, targets.object_masks);
  out.breakdown.l_box = l_box.value().scalar();
  out.breakdown.l_mask = l_mask.value().scalar();
  terms = {l_box, l_mask};
  w = {weights.box, weights.mask};

  const std::int64_t n_triplets = targets.superboxes.rows();
  if (prediction.has_triplet_heads && n_triplets > 0) {
    if (prediction.superboxes.rows() != n_triplets ||
        prediction.triplet_mask_logits.rows() != n_triplets ||
        static_cast<std::int64_t>(targets.triplet_mask_labels.size()) !=
            n_triplets * kTripletMaskPixels) {
      throw Error(ErrorCode::kShapeMismatch, "triplet predictions vs targets");
    }
    Var pixels = Reshape(prediction.triplet_mask_logits,
                         n_triplets * kTripletMaskPixels, kTripletMaskClasses);
    Var l_tmask = SoftmaxCrossEntropy(pixels, targets.triplet_mask_labels);
    Var l_sbox = MeanSquaredError(prediction.superboxes, targets.superboxes);
    out.breakdown.l_triplet_mask = l_tmask.value().scalar();
    out.breakdown.l_triplet_superbox = l_sbox.value().scalar();
    terms.push_back(l_tmask);
    terms.push_back(l_sbox);
    w.push_back(weights.triplet_mask);
    w.push_back(weights.triplet_superbox);
  }
  out.total = WeightedSum(terms, w);
  out.breakdown.total = out.total.value().scalar();
  return out;
}

nlohmann::json LayoutMetricsToJson(const LayoutMetrics& m) {
  return {{"mean_box_iou", m.mean_box_iou},
          {"mean_superbox_iou", m.mean_superbox_iou},
          {"triplet_mask_accuracy", m.triplet_mask_accuracy},
          {"num_objects", m.num_objects},
          {"num_triplets", m.num_triplets}};
}

Box BoxFromRow(const Tensor& boxes, std::int64_t row) {
  return Box{boxes.at(row, 0), boxes.at(row, 1), boxes.at(row, 2),
             boxes.at(row, 3)};
}

void LayoutMetricsAccumulator::Add(const Tensor& predicted_boxes,
                                   const Tensor& target_boxes,
                                   const Tensor& predicted_superboxes,
                                   const Tensor& target_superboxes,
                                   const Tensor& triplet_mask_logits,
                                   const std::vector<int>& triplet_mask_labels) {
  if (predicted_boxes.rows() != target_boxes.rows() ||
      predicted_superboxes.rows() != target_superboxes.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "metric inputs differ in rows");
  }
  for (std::int64_t i = 0; i < target_boxes.rows(); ++i) {
    box_iou_sum_ += IntersectionOverUnion(BoxFromRow(predicted_boxes, i),
                                          BoxFromRow(target_boxes, i));
  }
  objects_ += target_boxes.rows();
  for (std::int64_t i = 0; i < target_superboxes.rows(); ++i) {
    superbox_iou_sum_ += IntersectionOverUnion(
        BoxFromRow(predicted_superboxes, i), BoxFromRow(target_superboxes, i));
  }
  triplets_ += target_superboxes.rows();
  const std::int64_t pixels = static_cast<std::int64_t>(triplet_mask_labels.size());
  if (triplet_mask_logits.size() != pixels * kTripletMaskClasses) {
    throw Error(ErrorCode::kShapeMismatch, "mask logits vs labels");
  }
  for (std::int64_t p = 0; p < pixels; ++p) {
    const double* row = triplet_mask_logits.raw() + p * kTripletMaskClasses;
    const int arg = static_cast<int>(
        std::max_element(row, row + kTripletMaskClasses) - row);
    if (arg == triplet_mask_labels[p]) ++correct_pixels_;
  }
  total_pixels_ += pixels;
}

LayoutMetrics LayoutMetricsAccumulator::Result() const {
  LayoutMetrics m;
  m.num_objects = objects_;
  m.num_triplets = triplets_;
  if (objects_ > 0) m.mean_box_iou = box_iou_sum_ / static_cast<double>(objects_);
  if (triplets_ > 0) {
    m.mean_superbox_iou = superbox_iou_sum_ / static_cast<double>(triplets_);
  }
  if (total_pixels_ > 0) {
    m.triplet_mask_accuracy = static_cast<double>(correct_pixels_) /
                              static_cast<double>(total_pixels_);
  }
  return m;
}

}  // namespace sgir
