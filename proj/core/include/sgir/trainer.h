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

#ifndef SGIR_TRAINER_H_
#define SGIR_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgir/encoder.h"
#include "sgir/error.h"
#include "sgir/layout.h"
#include "sgir/optimizer.h"
#include "sgir/param_store.h"
#include "sgir/scene_graph.h"

namespace sgir {

struct Checkpoint {
  ModelConfig config;
  std::uint64_t vocab_hash = 0;
  ParamStore params;
};

// Writes the binary parameter file at `path` and a JSON manifest with the
// model config, vocabulary hash and `extra` (e.g. the training config) at
// ManifestPath(path).
void SaveCheckpoint(const std::filesystem::path& path,
                    const Checkpoint& checkpoint,
                    const nlohmann::json& extra = nlohmann::json::object());
// Reads both files and checks that the parameter set matches the config.
// Throws IncompatibleCheckpoint on any mismatch.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);
std::filesystem::path ManifestPath(const std::filesystem::path& path);

// Throws IncompatibleCheckpoint when the checkpoint was trained on a
// different class vocabulary or its parameters disagree with its config.
void CheckCompatible(const Checkpoint& checkpoint, const ClassVocabulary& vocab);
void CheckParameterShapes(const Checkpoint& checkpoint);

struct TrainConfig {
  std::uint64_t seed = 1;
  int epochs = 30;
  int batch_size = 8;
  AdamConfig adam;
  LossWeights weights;
  // false trains the NoTriplet variant: triplet-head loss weights forced to 0.
  bool triplet_supervision = true;
  // Stops after this many optimizer steps when positive.
  std::int64_t max_steps = 0;
  // num_classes is taken from the vocabulary at train time.
  ModelConfig model;

  void Validate() const;
  LossWeights EffectiveWeights() const;
};

nlohmann::json TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& doc);
TrainConfig ReadTrainConfig(const std::filesystem::path& path);

struct EpochReport {
  int epoch = 0;
  std::int64_t steps = 0;
  LossBreakdown mean;
};

struct TrainReport {
  std::vector<EpochReport> epochs;
  std::vector<double> step_losses;
  LayoutMetrics final_metrics;
  std::int64_t steps = 0;
  double wall_seconds = 0.0;
};

nlohmann::json TrainReportToJson(const TrainReport& report);
std::string TrainReportTable(const TrainReport& report);

struct TrainResult {
  Checkpoint checkpoint;
  TrainReport report;
};

// Raised when a loss or gradient stops being finite. `last_good` holds the
// parameters before the failing step.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, Checkpoint last_good)
      : Error(ErrorCode::kNumericalDivergence, message),
        last_good_(std::move(last_good)) {}
  const Checkpoint& last_good() const { return last_good_; }

 private:
  Checkpoint last_good_;
};

using StepCallback = std::function<void(std::int64_t step, const LossBreakdown&)>;

// Seeded mini-batch training of encoder and heads on the layout pretext task.
// Batches are merged into one disconnected graph per step. Deterministic for a
// fixed (corpus, vocabulary, config). Throws EmptyCorpus or DivergenceError.
TrainResult Train(std::span<const SceneGraph> corpus,
                  const ClassVocabulary& vocab, const TrainConfig& config,
                  const StepCallback& on_step = {});

// Forward pass of the frozen model over `corpus` (layout heads included).
// Throws IncompatibleCheckpoint when a class id exceeds the model vocabulary.
LayoutMetrics EvaluateLayout(const Checkpoint& checkpoint,
                             std::span<const SceneGraph> corpus,
                             int batch_size = 8);

}  // namespace sgir

#endif  // SGIR_TRAINER_H_
