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

#ifndef SGIR_ENCODER_H_
#define SGIR_ENCODER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgir/autodiff.h"
#include "sgir/param_store.h"
#include "sgir/scene_graph.h"
#include "sgir/tensor.h"

namespace sgir {

struct ModelConfig {
  std::int64_t d_embed = 128;
  std::int64_t d_hidden = 512;
  // Graph-convolution rounds, each with its own per-triplet MLP.
  int n_rounds = 5;
  // Hidden layers inside each round's MLP: [3d, d_hidden x k, 3d].
  int gcn_hidden_layers = 1;
  int num_classes = 0;
  int num_predicates = kNumPredicates;
  // Hidden width of the box, mask and superbox heads.
  std::int64_t head_hidden = 128;
  // Hidden width of the 64x64x3 triplet-mask head.
  std::int64_t triplet_mask_hidden = 128;

  // Throws InvalidArgument on a non-positive size or zero rounds.
  void Validate() const;
  std::vector<std::int64_t> RoundDims() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json ModelConfigToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const nlohmann::json& doc);

// Per-node and per-edge embeddings of one (possibly batched) graph, recorded
// on a tape. Row i of `objects` belongs to graph->objects[i]; row t of
// `predicates` to graph->triplets[t].
struct EmbeddingSet {
  const SceneGraph* graph = nullptr;
  Var objects;
  Var predicates;
};

// Creates every parameter of the model: embedding tables (`embed.class`,
// `embed.pred`), graph-conv rounds (`gcn.round{i}`) and layout heads
// (`head.box`, `head.mask`, `head.triplet_mask`, `head.superbox`).
void InitModelParams(ParamStore& store, const ModelConfig& config);

// Concatenates graphs into one disconnected graph with shifted node ids.
SceneGraph MergeGraphs(std::span<const SceneGraph> graphs);

// Table lookups by class id and predicate index. Throws UnknownClass.
EmbeddingSet InitEmbeddings(Tape& tape, const SceneGraph& graph,
                            ParamStore& store, const ModelConfig& config);

// One message-passing round: every triplet row concat(s, p, o) goes through
// the round MLP and splits into candidate s / p / o vectors. Objects take the
// mean of their candidates (unchanged when in no triplet); predicates take
// their candidate directly.
EmbeddingSet GraphConvRound(Tape& tape, const EmbeddingSet& input,
                            ParamStore& store, const ModelConfig& config,
                            int round_index);

// InitEmbeddings followed by config.n_rounds rounds.
EmbeddingSet EncodeGraph(Tape& tape, const SceneGraph& graph,
                         ParamStore& store, const ModelConfig& config);

// Rows concat(subject, predicate, object) for every triplet: [T x 3d].
Var TripletEmbeddings(const EmbeddingSet& embeddings);

// subject || predicate || object of one triplet (length 3d). Throws
// ForeignTriplet when `triplet` is not an edge of the embedded graph.
Tensor TripletEmbedding(const EmbeddingSet& embeddings, const Triplet& triplet);

}  // namespace sgir

#endif  // SGIR_ENCODER_H_
