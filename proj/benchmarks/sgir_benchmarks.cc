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

#include <benchmark/benchmark.h>

#include <vector>

#include "sgir/dataset.h"
#include "sgir/encoder.h"
#include "sgir/layout.h"
#include "sgir/optimizer.h"
#include "sgir/random.h"
#include "sgir/retrieval.h"
#include "sgir/scene_graph.h"

namespace sgir {
namespace {

std::vector<std::pair<Box, Box>> RandomPairs(int n) {
  Rng rng(1);
  auto box = [&] {
    const double x0 = rng.Uniform(0, 0.8), y0 = rng.Uniform(0, 0.8);
    return Box{x0, y0, x0 + rng.Uniform(0.01, 0.2), y0 + rng.Uniform(0.01, 0.2)};
  };
  std::vector<std::pair<Box, Box>> pairs;
  while (static_cast<int>(pairs.size()) < n) {
    Box a = box(), b = box();
    if (a.CenterX() != b.CenterX() || a.CenterY() != b.CenterY()) {
      pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

void BM_GeometricPredicate(benchmark::State& state) {
  const auto pairs = RandomPairs(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 1023];
    benchmark::DoNotOptimize(GeometricPredicate(a, b));
  }
}
BENCHMARK(BM_GeometricPredicate);

EmbeddingDatabase RandomDatabase(int n, int d) {
  Rng rng(2);
  std::vector<EmbeddingRecord> records(n);
  for (int i = 0; i < n; ++i) {
    EmbeddingRecord& r = records[i];
    r.record_id = i;
    r.image_id = i / 4;
    r.subject_class = static_cast<std::uint32_t>(rng.UniformInt(20));
    r.predicate = PredicateFromIndex(static_cast<int>(rng.UniformInt(6)));
    r.object_class = static_cast<std::uint32_t>(rng.UniformInt(20));
    for (auto* v : {&r.subject_vec, &r.predicate_vec, &r.object_vec}) {
      v->resize(d);
      for (double& x : *v) x = rng.Normal();
    }
  }
  return EmbeddingDatabase(d, 0, std::move(records));
}

void BM_RankSPO(benchmark::State& state) {
  const EmbeddingDatabase db = RandomDatabase(static_cast<int>(state.range(0)), 128);
  const QueryVector q = FormQuery(db.record(0), QueryMode::kSPO);
  for (auto _ : state) benchmark::DoNotOptimize(Rank(db, q, 100));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankSPO)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_RecallAtK(benchmark::State& state) {
  const EmbeddingDatabase db = RandomDatabase(static_cast<int>(state.range(0)), 128);
  const auto queries = LeaveOneOutQueries(db, QueryMode::kSO);
  const std::vector<int> ks = {1, 5, 10};
  for (auto _ : state) benchmark::DoNotOptimize(RecallAtK(db, queries, ks));
}
BENCHMARK(BM_RecallAtK)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

std::vector<SceneGraph> Corpus(int n) {
  return BuildSceneGraphs(GenerateSyntheticCorpus(3, n, VocabSpec{}),
                          GraphBuildConfig{});
}

void BM_EncodeGraph(benchmark::State& state) {
  const auto corpus = Corpus(8);
  ModelConfig config;
  config.num_classes = 50;
  ParamStore store(1);
  InitModelParams(store, config);
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(EncodeGraph(tape, corpus[0], store, config));
  }
}
BENCHMARK(BM_EncodeGraph)->Unit(benchmark::kMicrosecond);

void BM_TrainStep(benchmark::State& state) {
  const auto corpus = Corpus(8);
  const SceneGraph batch = MergeGraphs(corpus);
  const LayoutTargets targets = RasterizeTargets(batch);
  ModelConfig config;
  config.num_classes = 50;
  ParamStore store(1);
  InitModelParams(store, config);
  AdamState adam;
  const bool triplet = state.range(0) != 0;
  const LossWeights weights = triplet ? LossWeights{} : LossWeights::NoTriplet();
  for (auto _ : state) {
    store.ZeroGrad();
    Tape tape;
    const EmbeddingSet emb = EncodeGraph(tape, batch, store, config);
    const LayoutPrediction pred = PredictLayout(tape, store, config, emb, triplet);
    const LossTerms loss = ComputeLosses(pred, targets, weights);
    tape.Backward(loss.total);
    AdamStep(store, adam);
  }
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace sgir

BENCHMARK_MAIN();
