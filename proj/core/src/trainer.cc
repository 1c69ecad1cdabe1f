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

#include "sgir/trainer.h"

#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sgir/checkpoint.h"
#include "sgir/corpus_io.h"
#include "sgir/random.h"

namespace sgir {

using nlohmann::json;

std::filesystem::path ManifestPath(const std::filesystem::path& path) {
  return path.string() + ".json";
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const Checkpoint& checkpoint, const json& extra) {
  WriteParams(path, checkpoint.params);
  json manifest = {{"format", "sgir-checkpoint"},
                   {"version", kCheckpointVersion},
                   {"model", ModelConfigToJson(checkpoint.config)},
                   {"vocab_hash", fmt::format("{:016x}", checkpoint.vocab_hash)},
                   {"param_count", checkpoint.params.size()},
                   {"scalar_count", checkpoint.params.NumScalars()}};
  for (const auto& [key, value] : extra.items()) manifest[key] = value;
  WriteTextFile(ManifestPath(path), manifest.dump(2) + "\n");
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  Checkpoint ckpt;
  ckpt.params = ReadParams(path);
  json manifest;
  try {
    manifest = json::parse(ReadTextFile(ManifestPath(path)));
    ckpt.config = ModelConfigFromJson(manifest.at("model"));
    ckpt.vocab_hash =
        std::stoull(manifest.at("vocab_hash").get<std::string>(), nullptr, 16);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                fmt::format("bad checkpoint manifest: {}", e.what()));
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                fmt::format("bad vocabulary hash in manifest: {}", e.what()));
  }
  CheckParameterShapes(ckpt);
  return ckpt;
}

void CheckParameterShapes(const Checkpoint& checkpoint) {
  try {
    checkpoint.config.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kIncompatibleCheckpoint, e.what());
  }
  ParamStore expected;
  InitModelParams(expected, checkpoint.config);
  for (const auto& [name, entry] : expected.entries()) {
    if (!checkpoint.params.Contains(name)) {
      throw Error(ErrorCode::kIncompatibleCheckpoint,
                  fmt::format("checkpoint lacks parameter '{}'", name));
    }
    const Tensor& have = checkpoint.params.Value(name);
    if (have.shape() != entry.value.shape()) {
      throw Error(ErrorCode::kIncompatibleCheckpoint,
                  fmt::format("parameter '{}' has shape {}, config implies {}",
                              name, ShapeString(have.shape()),
                              ShapeString(entry.value.shape())));
    }
  }
  if (checkpoint.params.size() != expected.size()) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "checkpoint holds parameters the config does not define");
  }
}

void CheckCompatible(const Checkpoint& checkpoint,
                     const ClassVocabulary& vocab) {
  if (checkpoint.config.num_classes != vocab.size()) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                fmt::format("checkpoint has {} classes, vocabulary has {}",
                            checkpoint.config.num_classes, vocab.size()));
  }
  if (checkpoint.vocab_hash != vocab.Hash()) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "checkpoint was trained on a different class vocabulary");
  }
  CheckParameterShapes(checkpoint);
}

void TrainConfig::Validate() const {
  if (epochs < 1 || batch_size < 1 || !(adam.learning_rate > 0.0) ||
      max_steps < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "epochs, batch size and learning rate must be positive");
  }
}

LossWeights TrainConfig::EffectiveWeights() const {
  if (triplet_supervision) return weights;
  LossWeights w = weights;
  w.triplet_mask = 0.0;
  w.triplet_superbox = 0.0;
  return w;
}

json TrainConfigToJson(const TrainConfig& c) {
  return {{"seed", c.seed},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.adam.learning_rate},
          {"beta1", c.adam.beta1},
          {"beta2", c.adam.beta2},
          {"adam_epsilon", c.adam.epsilon},
          {"loss_weights", LossWeightsToJson(c.weights)},
          {"triplet_supervision", c.triplet_supervision},
          {"max_steps", c.max_steps},
          {"model", ModelConfigToJson(c.model)}};
}

TrainConfig TrainConfigFromJson(const json& doc) {
  TrainConfig c;
  try {
    c.seed = doc.value("seed", c.seed);
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.adam.learning_rate = doc.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = doc.value("beta1", c.adam.beta1);
    c.adam.beta2 = doc.value("beta2", c.adam.beta2);
    c.adam.epsilon = doc.value("adam_epsilon", c.adam.epsilon);
    if (doc.contains("loss_weights")) {
      c.weights = LossWeightsFromJson(doc["loss_weights"]);
    }
    c.triplet_supervision =
        doc.value("triplet_supervision", c.triplet_supervision);
    c.max_steps = doc.value("max_steps", c.max_steps);
    if (doc.contains("model")) c.model = ModelConfigFromJson(doc["model"]);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("bad training config: {}", e.what()));
  }
  c.Validate();
  return c;
}

TrainConfig ReadTrainConfig(const std::filesystem::path& path) {
  try {
    return TrainConfigFromJson(json::parse(ReadTextFile(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{}: {}", path.string(), e.what()));
  }
}

json TrainReportToJson(const TrainReport& report) {
  json epochs = json::array();
  for (const EpochReport& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"steps", e.steps},
                      {"mean", LossBreakdownToJson(e.mean)}});
  }
  return {{"epochs", std::move(epochs)},
          {"steps", report.steps},
          {"step_losses", report.step_losses},
          {"final_metrics", LayoutMetricsToJson(report.final_metrics)},
          {"wall_seconds", report.wall_seconds}};
}

std::string TrainReportTable(const TrainReport& report) {
  std::string out = fmt::format("{:>5} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
                                "epoch", "steps", "l_box", "l_mask",
                                "l_tmask", "l_sbox", "total");
  for (const EpochReport& e : report.epochs) {
    out += fmt::format("{:>5} {:>6} {:>10.5f} {:>10.5f} {:>10.5f} {:>10.5f} "
                       "{:>10.5f}\n",
                       e.epoch, e.steps, e.mean.l_box, e.mean.l_mask,
                       e.mean.l_triplet_mask, e.mean.l_triplet_superbox,
                       e.mean.total);
  }
  const LayoutMetrics& m = report.final_metrics;
  out += fmt::format(
      "box IoU {:.4f}  superbox IoU {:.4f}  triplet-mask accuracy {:.4f}  "
      "({} steps, {:.1f} s)\n",
      m.mean_box_iou, m.mean_superbox_iou, m.triplet_mask_accuracy,
      report.steps, report.wall_seconds);
  return out;
}

namespace {

bool GradientsFinite(const ParamStore& store) {
  for (const auto& [name, entry] : store.entries()) {
    if (entry.has_grad && !entry.grad.AllFinite()) return false;
  }
  return true;
}

void Accumulate(LossBreakdown& sum, const LossBreakdown& b) {
  sum.l_box += b.l_box;
  sum.l_mask += b.l_mask;
  sum.l_triplet_mask += b.l_triplet_mask;
  sum.l_triplet_superbox += b.l_triplet_superbox;
  sum.total += b.total;
}

}  // namespace

TrainResult Train(std::span<const SceneGraph> corpus,
                  const ClassVocabulary& vocab, const TrainConfig& config,
                  const StepCallback& on_step) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "training corpus has no graphs");
  }
  config.Validate();
  for (const SceneGraph& g : corpus) ValidateSceneGraph(g, vocab.size());

  const auto start = std::chrono::steady_clock::now();
  Checkpoint ckpt;
  ckpt.config = config.model;
  ckpt.config.num_classes = vocab.size();
  ckpt.vocab_hash = vocab.Hash();
  ckpt.params = ParamStore(config.seed);
  InitModelParams(ckpt.params, ckpt.config);

  const LossWeights weights = config.EffectiveWeights();
  const bool with_triplet_heads = weights.UsesTripletHeads();
  AdamState adam;
  adam.config = config.adam;
  Rng rng(config.seed ^ 0x5eed5eed5eed5eedULL);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  bool done = false;
  for (int epoch = 0; epoch < config.epochs && !done; ++epoch) {
    rng.Shuffle(order.begin(), order.end());
    EpochReport epoch_report;
    epoch_report.epoch = epoch + 1;
    epoch_report.mean.weights = weights;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      std::vector<SceneGraph> batch;
      batch.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) batch.push_back(corpus[order[k]]);
      const SceneGraph merged = MergeGraphs(batch);
      const LayoutTargets targets = RasterizeTargets(merged);

      ckpt.params.ZeroGrad();
      LossTerms loss;
      try {
        Tape tape;
        const EmbeddingSet emb =
            EncodeGraph(tape, merged, ckpt.params, ckpt.config);
        const LayoutPrediction pred = PredictLayout(
            tape, ckpt.params, ckpt.config, emb, with_triplet_heads);
        loss = ComputeLosses(pred, targets, weights);
        tape.Backward(loss.total);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite) throw;
        throw DivergenceError(
            fmt::format("step {}: {}", report.steps + 1, e.what()),
            Checkpoint{ckpt.config, ckpt.vocab_hash, ckpt.params});
      }
      if (!std::isfinite(loss.breakdown.total) ||
          !GradientsFinite(ckpt.params)) {
        throw DivergenceError(
            fmt::format("step {}: non-finite loss or gradient",
                        report.steps + 1),
            Checkpoint{ckpt.config, ckpt.vocab_hash, ckpt.params});
      }
      AdamStep(ckpt.params, adam);

      ++report.steps;
      ++epoch_report.steps;
      report.step_losses.push_back(loss.breakdown.total);
      Accumulate(epoch_report.mean, loss.breakdown);
      if (on_step) on_step(report.steps, loss.breakdown);
      if (config.max_steps > 0 && report.steps >= config.max_steps) {
        done = true;
        break;
      }
    }
    if (epoch_report.steps > 0) {
      const double n = static_cast<double>(epoch_report.steps);
      epoch_report.mean.l_box /= n;
      epoch_report.mean.l_mask /= n;
      epoch_report.mean.l_triplet_mask /= n;
      epoch_report.mean.l_triplet_superbox /= n;
      epoch_report.mean.total /= n;
    }
    spdlog::info("epoch {} total {:.5f}", epoch_report.epoch,
                 epoch_report.mean.total);
    report.epochs.push_back(epoch_report);
  }

  report.final_metrics = EvaluateLayout(ckpt, corpus, config.batch_size);
  report.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return TrainResult{std::move(ckpt), std::move(report)};
}

LayoutMetrics EvaluateLayout(const Checkpoint& checkpoint,
                             std::span<const SceneGraph> corpus,
                             int batch_size) {
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "batch size must be positive");
  }
  for (const SceneGraph& g : corpus) {
    for (const ObjectNode& node : g.objects) {
      if (node.class_id < 0 || node.class_id >= checkpoint.config.num_classes) {
        throw Error(ErrorCode::kIncompatibleCheckpoint,
                    fmt::format("graph '{}' uses class {} but the model knows "
                                "{} classes",
                                g.image_id, node.class_id,
                                checkpoint.config.num_classes));
      }
    }
  }
  ParamStore params = checkpoint.params;
  LayoutMetricsAccumulator acc;
  for (std::size_t begin = 0; begin < corpus.size(); begin += batch_size) {
    const std::size_t end =
        std::min(corpus.size(), begin + static_cast<std::size_t>(batch_size));
    const SceneGraph merged = MergeGraphs(corpus.subspan(begin, end - begin));
    const LayoutTargets targets = RasterizeTargets(merged);
    Tape tape;
    const EmbeddingSet emb = EncodeGraph(tape, merged, params, checkpoint.config);
    const LayoutPrediction pred =
        PredictLayout(tape, params, checkpoint.config, emb, true);
    if (pred.has_triplet_heads) {
      acc.Add(pred.boxes.value(), targets.boxes, pred.superboxes.value(),
              targets.superboxes, pred.triplet_mask_logits.value(),
              targets.triplet_mask_labels);
    } else {
      acc.Add(pred.boxes.value(), targets.boxes, Tensor::Matrix(0, 4),
              Tensor::Matrix(0, 4), Tensor::Matrix(0, 3), {});
    }
  }
  return acc.Result();
}

}  // namespace sgir
