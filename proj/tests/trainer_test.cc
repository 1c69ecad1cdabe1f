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
#include <nlohmann/json.hpp>

#include "sgir/checkpoint.h"
#include "sgir/corpus_io.h"
#include "sgir/dataset.h"
#include "sgir/trainer.h"
#include "test_support.h"

namespace sgir {
namespace {

using testing::TinyConfig;

struct Fixture {
  std::vector<SceneGraph> corpus;
  ClassVocabulary vocab;
};

Fixture SmallCorpus(int scenes = 12) {
  VocabSpec spec;
  spec.num_classes = 6;
  Fixture f;
  f.corpus = BuildSceneGraphs(GenerateSyntheticCorpus(3, scenes, spec), GraphBuildConfig{});
  f.vocab = ClassFrequencies(f.corpus, SyntheticClassNames(spec));
  return f;
}

TrainConfig SmallTrainConfig() {
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 4;
  c.model = TinyConfig(0);
  return c;
}

TEST(CheckpointTest, ParamsRoundTripBitExact) {
  ParamStore store(3);
  InitModelParams(store, TinyConfig(4));
  store.MutableValue("embed.class")[0] = -0.0;
  store.MutableValue("embed.class")[1] = 1e-310;
  const std::string bytes = SerializeParams(store);
  EXPECT_EQ(bytes.substr(0, 4), "SGIR");
  const ParamStore back = ParseParams(bytes);
  ASSERT_EQ(back.Names(), store.Names());
  for (const auto& name : store.Names()) EXPECT_EQ(back.Value(name), store.Value(name));
  EXPECT_TRUE(std::signbit(back.Value("embed.class")[0]));
  EXPECT_EQ(SerializeParams(back), bytes);
}

TEST(CheckpointTest, MalformedBytes) {
  ParamStore store(3);
  InitModelParams(store, TinyConfig(2));
  const std::string bytes = SerializeParams(store);
  EXPECT_SGIR_ERROR(ParseParams("XXXX" + bytes.substr(4)), ErrorCode::kMalformedFile);
  EXPECT_SGIR_ERROR(ParseParams(bytes.substr(0, bytes.size() - 3)), ErrorCode::kMalformedFile);
  EXPECT_SGIR_ERROR(ParseParams(bytes + "x"), ErrorCode::kMalformedFile);
  std::string version = bytes;
  version[4] = 9;
  EXPECT_SGIR_ERROR(ParseParams(version), ErrorCode::kMalformedFile);
  EXPECT_SGIR_ERROR(ParseParams(""), ErrorCode::kMalformedFile);
}

TEST(CheckpointTest, SaveLoadWithManifest) {
  const Fixture f = SmallCorpus();
  Checkpoint ckpt;
  ckpt.config = TinyConfig(f.vocab.size());
  ckpt.vocab_hash = f.vocab.Hash();
  ckpt.params = ParamStore(5);
  InitModelParams(ckpt.params, ckpt.config);
  testing::TempDir dir;
  const std::string path = dir.File("m.ckpt");
  SaveCheckpoint(path, ckpt, {{"note", "x"}});
  const auto manifest = nlohmann::json::parse(ReadTextFile(ManifestPath(path)));
  EXPECT_EQ(manifest["note"], "x");
  EXPECT_EQ(manifest["param_count"], ckpt.params.size());
  EXPECT_EQ(manifest["model"]["d_embed"], 6);

  const Checkpoint back = LoadCheckpoint(path);
  EXPECT_EQ(back.config, ckpt.config);
  EXPECT_EQ(back.vocab_hash, ckpt.vocab_hash);
  EXPECT_EQ(SerializeParams(back.params), SerializeParams(ckpt.params));
  EXPECT_NO_THROW(CheckCompatible(back, f.vocab));

  ClassVocabulary renamed = f.vocab;
  renamed.names[0] = "renamed";
  EXPECT_SGIR_ERROR(CheckCompatible(back, renamed), ErrorCode::kIncompatibleCheckpoint);
}

TEST(CheckpointTest, ParameterSetMustMatchConfig) {
  Checkpoint ckpt;
  ckpt.config = TinyConfig(3);
  ckpt.params = ParamStore(1);
  InitModelParams(ckpt.params, ckpt.config);
  Checkpoint bigger = ckpt;
  bigger.config.n_rounds = 3;
  EXPECT_SGIR_ERROR(CheckParameterShapes(bigger), ErrorCode::kIncompatibleCheckpoint);
  testing::TempDir dir;
  SaveCheckpoint(dir.File("a.ckpt"), bigger);
  EXPECT_SGIR_ERROR(LoadCheckpoint(dir.File("a.ckpt")), ErrorCode::kIncompatibleCheckpoint);
  EXPECT_ANY_THROW(LoadCheckpoint(dir.File("missing.ckpt")));
}

TEST(TrainConfigTest, JsonAndValidation) {
  TrainConfig c = SmallTrainConfig();
  c.seed = 77;
  c.triplet_supervision = false;
  c.weights.mask = 0.3;
  c.adam.learning_rate = 0.02;
  const TrainConfig back = TrainConfigFromJson(TrainConfigToJson(c));
  EXPECT_EQ(TrainConfigToJson(back), TrainConfigToJson(c));
  EXPECT_EQ(back.EffectiveWeights().triplet_mask, 0.0);
  EXPECT_EQ(back.EffectiveWeights().mask, 0.3);
  TrainConfig bad = c;
  bad.epochs = 0;
  EXPECT_SGIR_ERROR(bad.Validate(), ErrorCode::kInvalidArgument);
  bad = c;
  bad.adam.learning_rate = -1;
  EXPECT_SGIR_ERROR(bad.Validate(), ErrorCode::kInvalidArgument);
}

TEST(TrainTest, DeterministicAndReportsSteps) {
  const Fixture f = SmallCorpus();
  std::int64_t callbacks = 0;
  const TrainResult a = Train(f.corpus, f.vocab, SmallTrainConfig(),
                              [&](std::int64_t, const LossBreakdown&) { ++callbacks; });
  const TrainResult b = Train(f.corpus, f.vocab, SmallTrainConfig());
  EXPECT_EQ(SerializeParams(a.checkpoint.params), SerializeParams(b.checkpoint.params));
  EXPECT_EQ(a.report.step_losses, b.report.step_losses);
  const std::int64_t per_epoch = (static_cast<std::int64_t>(f.corpus.size()) + 3) / 4;
  EXPECT_EQ(a.report.steps, 2 * per_epoch);
  EXPECT_EQ(callbacks, a.report.steps);
  ASSERT_EQ(a.report.epochs.size(), 2u);
  EXPECT_EQ(a.checkpoint.config.num_classes, 6);
  EXPECT_EQ(a.checkpoint.vocab_hash, f.vocab.Hash());

  TrainConfig other = SmallTrainConfig();
  other.seed = 2;
  EXPECT_NE(SerializeParams(Train(f.corpus, f.vocab, other).checkpoint.params),
            SerializeParams(a.checkpoint.params));
}

TEST(TrainTest, LossDecreases) {
  const Fixture f = SmallCorpus(16);
  TrainConfig c = SmallTrainConfig();
  c.epochs = 15;
  c.adam.learning_rate = 3e-3;
  const TrainResult r = Train(f.corpus, f.vocab, c);
  EXPECT_LT(r.report.epochs.back().mean.total, 0.7 * r.report.epochs.front().mean.total);
}

TEST(TrainTest, NoTripletLeavesTripletHeadsUntouched) {
  const Fixture f = SmallCorpus();
  TrainConfig c = SmallTrainConfig();
  c.triplet_supervision = false;
  const TrainResult r = Train(f.corpus, f.vocab, c);
  ParamStore init(c.seed);
  ModelConfig m = c.model;
  m.num_classes = f.vocab.size();
  InitModelParams(init, m);
  EXPECT_EQ(r.checkpoint.params.Value("head.superbox.layer0.weight"),
            init.Value("head.superbox.layer0.weight"));
  EXPECT_EQ(r.checkpoint.params.Value("head.triplet_mask.layer1.bias"),
            init.Value("head.triplet_mask.layer1.bias"));
  EXPECT_NE(r.checkpoint.params.Value("head.box.layer0.weight"),
            init.Value("head.box.layer0.weight"));
  for (const EpochReport& e : r.report.epochs) {
    EXPECT_EQ(e.mean.l_triplet_mask, 0.0);
    EXPECT_EQ(e.mean.weights.triplet_superbox, 0.0);
  }
}

TEST(TrainTest, MaxStepsStopsEarly) {
  const Fixture f = SmallCorpus();
  TrainConfig c = SmallTrainConfig();
  c.epochs = 100;
  c.max_steps = 3;
  EXPECT_EQ(Train(f.corpus, f.vocab, c).report.steps, 3);
}

TEST(TrainTest, DivergenceKeepsLastGoodParameters) {
  const Fixture f = SmallCorpus();
  TrainConfig c = SmallTrainConfig();
  c.epochs = 50;
  c.adam.learning_rate = 1e150;
  try {
    Train(f.corpus, f.vocab, c);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumericalDivergence);
    for (const auto& [name, entry] : e.last_good().params.entries()) {
      EXPECT_TRUE(entry.value.AllFinite()) << name;
    }
  }
}

TEST(TrainTest, InputErrors) {
  const Fixture f = SmallCorpus();
  EXPECT_SGIR_ERROR(Train({}, f.vocab, SmallTrainConfig()), ErrorCode::kEmptyCorpus);
  ClassVocabulary small = f.vocab;
  small.names.resize(2);
  small.frequencies.resize(2);
  EXPECT_SGIR_ERROR(Train(f.corpus, small, SmallTrainConfig()), ErrorCode::kUnknownClass);
}

TEST(EvaluateTest, MetricsInRangeAndClassCheck) {
  const Fixture f = SmallCorpus();
  const TrainResult r = Train(f.corpus, f.vocab, SmallTrainConfig());
  const LayoutMetrics m = EvaluateLayout(r.checkpoint, f.corpus);
  EXPECT_GE(m.mean_box_iou, 0.0);
  EXPECT_LE(m.mean_box_iou, 1.0);
  EXPECT_EQ(m.num_objects, [&] {
    std::int64_t n = 0;
    for (const auto& g : f.corpus) n += static_cast<std::int64_t>(g.objects.size());
    return n;
  }());
  Checkpoint narrow = r.checkpoint;
  narrow.config.num_classes = 1;
  EXPECT_SGIR_ERROR(EvaluateLayout(narrow, f.corpus), ErrorCode::kIncompatibleCheckpoint);
}

}  // namespace
}  // namespace sgir
