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

#include "sgir/encoder.h"

#include <fmt/format.h>

#include "sgir/error.h"
#include "sgir/layout.h"
#include "sgir/nn.h"

namespace sgir {

void ModelConfig::Validate() const {
  if (d_embed <= 0 || d_hidden <= 0 || head_hidden <= 0 ||
      triplet_mask_hidden <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "model widths must be positive");
  }
  if (n_rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("n_rounds must be at least 1, got {}", n_rounds));
  }
  if (gcn_hidden_layers < 0) {
    throw Error(ErrorCode::kInvalidArgument, "gcn_hidden_layers is negative");
  }
  if (num_classes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "model needs at least one class");
  }
  if (num_predicates != kNumPredicates) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("expected {} predicates", kNumPredicates));
  }
}

std::vector<std::int64_t> ModelConfig::RoundDims() const {
  std::vector<std::int64_t> dims{3 * d_embed};
  for (int i = 0; i < gcn_hidden_layers; ++i) dims.push_back(d_hidden);
  dims.push_back(3 * d_embed);
  return dims;
}

nlohmann::json ModelConfigToJson(const ModelConfig& c) {
  return {{"d_embed", c.d_embed},
          {"d_hidden", c.d_hidden},
          {"n_rounds", c.n_rounds},
          {"gcn_hidden_layers", c.gcn_hidden_layers},
          {"num_classes", c.num_classes},
          {"num_predicates", c.num_predicates},
          {"head_hidden", c.head_hidden},
          {"triplet_mask_hidden", c.triplet_mask_hidden}};
}

ModelConfig ModelConfigFromJson(const nlohmann::json& doc) {
  ModelConfig c;
  try {
    c.d_embed = doc.value("d_embed", c.d_embed);
    c.d_hidden = doc.value("d_hidden", c.d_hidden);
    c.n_rounds = doc.value("n_rounds", c.n_rounds);
    c.gcn_hidden_layers = doc.value("gcn_hidden_layers", c.gcn_hidden_layers);
    c.num_classes = doc.value("num_classes", c.num_classes);
    c.num_predicates = doc.value("num_predicates", c.num_predicates);
    c.head_hidden = doc.value("head_hidden", c.head_hidden);
    c.triplet_mask_hidden =
        doc.value("triplet_mask_hidden", c.triplet_mask_hidden);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("bad model config: {}", e.what()));
  }
  return c;
}

void InitModelParams(ParamStore& store, const ModelConfig& config) {
  config.Validate();
  store.GetOrCreate("embed.class", {config.num_classes, config.d_embed},
                    ParamInit::kGlorotUniform);
  store.GetOrCreate("embed.pred", {config.num_predicates, config.d_embed},
                    ParamInit::kGlorotUniform);
  for (int r = 0; r < config.n_rounds; ++r) {
    InitMlp(store, fmt::format("gcn.round{}", r), config.RoundDims());
  }
  InitLayoutHeads(store, config);
}

SceneGraph MergeGraphs(std::span<const SceneGraph> graphs) {
  SceneGraph merged;
  for (const SceneGraph& g : graphs) {
    const int offset = static_cast<int>(merged.objects.size());
    if (!merged.image_id.empty()) merged.image_id += ",";
    merged.image_id += g.image_id;
    for (const ObjectNode& node : g.objects) {
      merged.objects.push_back(
          ObjectNode{node.node_id + offset, node.class_id, node.box});
    }
    for (const Triplet& t : g.triplets) {
      merged.triplets.push_back(
          Triplet{t.subject_id + offset, t.predicate, t.object_id + offset});
    }
  }
  return merged;
}

EmbeddingSet InitEmbeddings(Tape& tape, const SceneGraph& graph,
                            ParamStore& store, const ModelConfig& config) {
  std::vector<int> class_ids;
  class_ids.reserve(graph.objects.size());
  for (const ObjectNode& node : graph.objects) {
    if (node.class_id < 0 || node.class_id >= config.num_classes) {
      throw Error(ErrorCode::kUnknownClass,
                  fmt::format("class id {} outside vocabulary of {}",
                              node.class_id, config.num_classes));
    }
    class_ids.push_back(node.class_id);
  }
  std::vector<int> predicate_ids;
  predicate_ids.reserve(graph.triplets.size());
  for (const Triplet& t : graph.triplets) {
    predicate_ids.push_back(static_cast<int>(t.predicate));
  }
  store.GetOrCreate("embed.class", {config.num_classes, config.d_embed},
                    ParamInit::kGlorotUniform);
  store.GetOrCreate("embed.pred", {config.num_predicates, config.d_embed},
                    ParamInit::kGlorotUniform);
  EmbeddingSet out;
  out.graph = &graph;
  out.objects = GatherRows(tape.Parameter(store, "embed.class"), class_ids);
  out.predicates =
      GatherRows(tape.Parameter(store, "embed.pred"), predicate_ids);
  return out;
}

EmbeddingSet GraphConvRound(Tape& tape, const EmbeddingSet& input,
                            ParamStore& store, const ModelConfig& config,
                            int round_index) {
  const SceneGraph& graph = *input.graph;
  if (input.objects.rows() != static_cast<std::int64_t>(graph.objects.size()) ||
      input.predicates.rows() !=
          static_cast<std::int64_t>(graph.triplets.size()) ||
      input.objects.cols() != config.d_embed) {
    throw Error(ErrorCode::kShapeMismatch,
                "embedding rows do not match the graph");
  }
  if (graph.triplets.empty()) return input;

  std::vector<int> subjects, objects;
  subjects.reserve(graph.triplets.size());
  objects.reserve(graph.triplets.size());
  for (const Triplet& t : graph.triplets) {
    subjects.push_back(t.subject_id);
    objects.push_back(t.object_id);
  }
  const std::int64_t d = config.d_embed;
  Var rows = ConcatCols({GatherRows(input.objects, subjects), input.predicates,
                         GatherRows(input.objects, objects)});
  Var out = MlpApply(tape, store, fmt::format("gcn.round{}", round_index), rows,
                     config.RoundDims());
  EmbeddingSet next;
  next.graph = input.graph;
  next.predicates = SliceCols(out, d, d);
  next.objects = MeanPoolObjects(SliceCols(out, 0, d), SliceCols(out, 2 * d, d),
                                 subjects, objects, input.objects);
  return next;
}

EmbeddingSet EncodeGraph(Tape& tape, const SceneGraph& graph,
                         ParamStore& store, const ModelConfig& config) {
  config.Validate();
  EmbeddingSet emb = InitEmbeddings(tape, graph, store, config);
  for (int r = 0; r < config.n_rounds; ++r) {
    emb = GraphConvRound(tape, emb, store, config, r);
  }
  return emb;
}

Var TripletEmbeddings(const EmbeddingSet& embeddings) {
  const SceneGraph& graph = *embeddings.graph;
  std::vector<int> subjects, objects;
  for (const Triplet& t : graph.triplets) {
    subjects.push_back(t.subject_id);
    objects.push_back(t.object_id);
  }
  return ConcatCols({GatherRows(embeddings.objects, subjects),
                     embeddings.predicates,
                     GatherRows(embeddings.objects, objects)});
}

Tensor TripletEmbedding(const EmbeddingSet& embeddings, const Triplet& triplet) {
  const SceneGraph& graph = *embeddings.graph;
  for (std::size_t t = 0; t < graph.triplets.size(); ++t) {
    if (graph.triplets[t] != triplet) continue;
    const Tensor& obj = embeddings.objects.value();
    const Tensor& pred = embeddings.predicates.value();
    const std::int64_t d = obj.cols();
    std::vector<double> v;
    v.reserve(3 * d);
    auto append = [&](const Tensor& m, std::int64_t row) {
      v.insert(v.end(), m.raw() + row * d, m.raw() + (row + 1) * d);
    };
    append(obj, triplet.subject_id);
    append(pred, static_cast<std::int64_t>(t));
    append(obj, triplet.object_id);
    return Tensor({3 * d}, std::move(v));
  }
  throw Error(ErrorCode::kForeignTriplet,
              fmt::format("triplet ({}, {}, {}) is not in graph '{}'",
                          triplet.subject_id, PredicateName(triplet.predicate),
                          triplet.object_id, graph.image_id));
}

}  // namespace sgir
