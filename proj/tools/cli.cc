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

#include "cli.h"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "http_server.h"
#include "sgir/corpus_io.h"
#include "sgir/dataset.h"
#include "sgir/error.h"
#include "sgir/logging.h"
#include "sgir/retrieval.h"
#include "sgir/scene_graph.h"
#include "sgir/service.h"
#include "sgir/trainer.h"

namespace sgir {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string VocabSidecar(const std::string& path) { return path + ".vocab.json"; }
std::string CorpusSidecar(const std::string& path) {
  return path + ".corpus.jsonl";
}

std::string Or(const std::string& value, const std::string& fallback) {
  return value.empty() ? fallback : value;
}

struct SynthArgs {
  std::string out;
  int scenes = 200;
  int classes = 50;
  double zipf = 1.0;
  std::uint64_t seed = 1;
  int max_objects = 8;
  int max_triplets = 8;
};

struct BuildGraphsArgs {
  std::string coco;
  std::string out;
  std::uint64_t seed = 1;
  int max_objects = 8;
  int max_triplets = 8;
  double min_area = 0.001;
};

struct TrainArgs {
  std::string corpus;
  std::string vocab;
  std::string out;
  std::string config;
  std::string report;
  std::uint64_t seed = 1;
  int epochs = 30;
  int batch_size = 8;
  double lr = 1e-3;
  std::int64_t max_steps = 0;
  bool no_triplet = false;
};

struct EmbedArgs {
  std::string checkpoint;
  std::string corpus;
  std::string vocab;
  std::string out;
};

struct DbArgs {
  std::string db;
  std::string vocab;
  std::string corpus;
};

struct QueryArgs {
  DbArgs db;
  std::string subject;
  std::string predicate;
  std::string object;
  std::string mode;
  int k = 10;
  bool json = false;
};

struct EvalArgs {
  DbArgs db;
  std::string mode = "s+o";
  std::vector<int> ks{1, 5, 10};
  double head_fraction = 0.2;
  std::optional<std::uint64_t> random_seed;
  std::string out;
};

struct ServeArgs {
  DbArgs db;
  std::string host = "127.0.0.1";
  int port = 8080;
};

void WriteJsonOrPrint(const json& doc, const std::string& path,
                      std::ostream& out) {
  if (path.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    WriteTextFile(path, doc.dump(2) + "\n");
  }
}

GraphBuildConfig GraphConfig(std::uint64_t seed, int max_objects,
                             int max_triplets) {
  GraphBuildConfig config;
  config.seed = seed;
  config.max_objects = max_objects;
  config.max_triplets = max_triplets;
  return config;
}

int RunSynth(const SynthArgs& a, std::ostream& out) {
  VocabSpec spec;
  spec.num_classes = a.classes;
  spec.zipf_exponent = a.zipf;
  const auto records = GenerateSyntheticCorpus(a.seed, a.scenes, spec);
  const auto graphs =
      BuildSceneGraphs(records, GraphConfig(a.seed, a.max_objects, a.max_triplets));
  const ClassVocabulary vocab =
      ClassFrequencies(graphs, SyntheticClassNames(spec));
  WriteGraphCorpus(a.out, graphs);
  WriteVocabulary(VocabSidecar(a.out), vocab);
  std::size_t triplets = 0;
  for (const auto& g : graphs) triplets += g.triplets.size();
  out << fmt::format("wrote {} graphs ({} triplets) to {}\n", graphs.size(),
                     triplets, a.out);
  return kExitOk;
}

int RunBuildGraphs(const BuildGraphsArgs& a, std::ostream& out) {
  const AnnotationSet set = LoadCocoAnnotations(a.coco);
  GraphBuildConfig config = GraphConfig(a.seed, a.max_objects, a.max_triplets);
  config.min_box_area = a.min_area;
  const auto graphs = BuildSceneGraphs(set.records, config);
  const ClassVocabulary vocab = ClassFrequencies(graphs, set.class_names);
  WriteGraphCorpus(a.out, graphs);
  WriteVocabulary(VocabSidecar(a.out), vocab);
  out << fmt::format("wrote {} graphs from {} annotated images to {}\n",
                     graphs.size(), set.records.size(), a.out);
  return kExitOk;
}

int RunTrain(const TrainArgs& a, const CLI::App& cmd, std::ostream& out) {
  TrainConfig config;
  if (!a.config.empty()) config = ReadTrainConfig(a.config);
  if (cmd.count("--seed")) config.seed = a.seed;
  if (cmd.count("--epochs")) config.epochs = a.epochs;
  if (cmd.count("--batch-size")) config.batch_size = a.batch_size;
  if (cmd.count("--lr")) config.adam.learning_rate = a.lr;
  if (cmd.count("--max-steps")) config.max_steps = a.max_steps;
  if (a.no_triplet) config.triplet_supervision = false;
  config.Validate();

  const auto corpus = ReadGraphCorpus(a.corpus);
  const ClassVocabulary vocab =
      ReadVocabulary(Or(a.vocab, VocabSidecar(a.corpus)));
  const TrainResult result = Train(corpus, vocab, config);
  SaveCheckpoint(a.out, result.checkpoint,
                 {{"train", TrainConfigToJson(config)}});
  if (!a.report.empty()) {
    WriteTextFile(a.report, TrainReportToJson(result.report).dump(2) + "\n");
  }
  out << TrainReportTable(result.report);
  out << fmt::format("saved checkpoint to {}\n", a.out);
  return kExitOk;
}

int RunEmbed(const EmbedArgs& a, std::ostream& out) {
  const Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  const auto corpus = ReadGraphCorpus(a.corpus);
  const ClassVocabulary vocab =
      ReadVocabulary(Or(a.vocab, VocabSidecar(a.corpus)));
  const EmbeddingDatabase db = BuildDatabase(ckpt, corpus, vocab);
  WriteDatabase(a.out, db);
  WriteVocabulary(VocabSidecar(a.out), vocab);
  WriteGraphCorpus(CorpusSidecar(a.out), corpus);
  out << fmt::format("wrote {} records (d = {}) to {}\n", db.size(),
                     db.d_embed(), a.out);
  return kExitOk;
}

std::unique_ptr<const QueryService> LoadService(const DbArgs& a,
                                                bool with_corpus) {
  EmbeddingDatabase db = ReadDatabase(a.db);
  ClassVocabulary vocab = ReadVocabulary(Or(a.vocab, VocabSidecar(a.db)));
  std::optional<std::vector<SceneGraph>> corpus;
  if (with_corpus) {
    const std::string path = Or(a.corpus, CorpusSidecar(a.db));
    if (!a.corpus.empty() || fs::exists(path)) {
      corpus = ReadGraphCorpus(path);
    } else {
      spdlog::warn("no corpus sidecar at {}; record geometry disabled", path);
    }
  }
  return std::make_unique<const QueryService>(std::move(db), std::move(vocab),
                                              std::move(corpus));
}

int RunQuery(const QueryArgs& a, std::ostream& out) {
  const auto service = LoadService(a.db, false);
  json request = {{"k", a.k}};
  if (!a.subject.empty()) request["subject"] = a.subject;
  if (!a.predicate.empty()) request["predicate"] = a.predicate;
  if (!a.object.empty()) request["object"] = a.object;
  if (!a.mode.empty()) request["mode"] = a.mode;
  const json response = service->Query(request);
  if (a.json) {
    out << response.dump() << "\n";
    return kExitOk;
  }
  out << fmt::format("{:>4}  {:>8}  {:>6}  {:<16} {:<12} {:<16} {:>12}  {:>12}\n",
                     "rank", "record", "image", "subject", "predicate",
                     "object", "distance", "similarity");
  for (const json& r : response["results"]) {
    const json& l = r["labels"];
    out << fmt::format(
        "{:>4}  {:>8}  {:>6}  {:<16} {:<12} {:<16} {:>12.9g}  {:>12.9g}{}\n",
        r["rank"].get<int>(), r["record_id"].get<std::uint64_t>(),
        r["image_id"].get<std::uint64_t>(), l["subject"].get<std::string>(),
        l["predicate"].get<std::string>(), l["object"].get<std::string>(),
        r["distance"].get<double>(), r["similarity"].get<double>(),
        r["exact_match"].get<bool>() ? "  *" : "");
  }
  return kExitOk;
}

int RunEval(const EvalArgs& a, std::ostream& out) {
  EmbeddingDatabase db = ReadDatabase(a.db.db);
  const ClassVocabulary vocab =
      ReadVocabulary(Or(a.db.vocab, VocabSidecar(a.db.db)));
  if (db.vocab_hash() != vocab.Hash()) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "database was built against a different vocabulary");
  }
  if (a.random_seed) db = RandomizeDatabase(db, *a.random_seed);
  const EvalSplit split = PartitionClasses(vocab, a.head_fraction);
  std::vector<QueryMode> modes;
  if (a.mode == "all") {
    modes.assign(std::begin(kAllQueryModes), std::end(kAllQueryModes));
  } else {
    modes.push_back(*ParseQueryMode(a.mode));
  }
  json reports = json::array();
  for (const QueryMode mode : modes) {
    const auto queries = LeaveOneOutQueries(db, mode);
    json report =
        EvaluationToJson(mode, RecallBySplit(db, queries, a.ks, split), db.size());
    report["random_baseline"] = a.random_seed.has_value();
    reports.push_back(std::move(report));
  }
  WriteJsonOrPrint(reports.size() == 1 ? reports[0] : reports, a.out, out);
  return kExitOk;
}

int RunServe(const ServeArgs& a, std::ostream& err) {
  std::shared_ptr<const QueryService> service = LoadService(a.db, true);
  HttpServer server(service);
  const int port = server.Bind(a.host, a.port);
  err << fmt::format("serving {} records on http://{}:{}\n",
                     service->db().size(), a.host, port)
      << std::flush;
  server.Listen();
  return kExitOk;
}

void AddDbOptions(CLI::App* cmd, DbArgs& a) {
  cmd->add_option("--db", a.db, "Embedding database (.sgdb)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--vocab", a.vocab,
                  "Class vocabulary JSON (default: <db>.vocab.json)");
}

const CLI::Validator kModeValidator(
    [](std::string& value) -> std::string {
      return ParseQueryMode(value) ? "" : "unknown mode '" + value + "'";
    },
    "MODE");

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  InitLoggingFromEnv();
  CLI::App app{"Scene-graph embedding image retrieval", "sgir"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sgir 0.1.0");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic graph corpus");
  synth_cmd->add_option("--out", synth.out, "Output corpus (.jsonl)")->required();
  synth_cmd->add_option("--scenes", synth.scenes, "Number of scenes")
      ->check(CLI::Range(1, 10000000));
  synth_cmd->add_option("--classes", synth.classes, "Number of classes")
      ->check(CLI::Range(1, 100000));
  synth_cmd->add_option("--zipf", synth.zipf, "Zipf exponent of class frequencies")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--max-objects", synth.max_objects)->check(CLI::Range(2, 1000));
  synth_cmd->add_option("--max-triplets", synth.max_triplets)->check(CLI::Range(1, 100000));

  BuildGraphsArgs build;
  auto* build_cmd =
      app.add_subcommand("build-graphs", "Convert COCO-style annotations to a graph corpus");
  build_cmd->add_option("--coco", build.coco, "COCO annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--out", build.out, "Output corpus (.jsonl)")->required();
  build_cmd->add_option("--seed", build.seed, "Seed for triplet subsampling");
  build_cmd->add_option("--max-objects", build.max_objects)->check(CLI::Range(2, 1000));
  build_cmd->add_option("--max-triplets", build.max_triplets)->check(CLI::Range(1, 100000));
  build_cmd->add_option("--min-area", build.min_area, "Minimum normalized box area")
      ->check(CLI::Range(0.0, 1.0));

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train the encoder on layout prediction");
  train_cmd->add_option("--corpus", train.corpus, "Graph corpus (.jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--vocab", train.vocab,
                        "Class vocabulary (default: <corpus>.vocab.json)");
  train_cmd->add_option("--out", train.out, "Output checkpoint")->required();
  train_cmd->add_option("--config", train.config, "Training config JSON")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--report", train.report, "Write the training report JSON here");
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--epochs", train.epochs)->check(CLI::Range(1, 1000000));
  train_cmd->add_option("--batch-size", train.batch_size)->check(CLI::Range(1, 1000000));
  train_cmd->add_option("--lr", train.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-steps", train.max_steps, "Stop after this many steps");
  train_cmd->add_flag("--no-triplet", train.no_triplet,
                      "Disable triplet-mask and superbox supervision");

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "Build an embedding database");
  embed_cmd->add_option("--checkpoint", embed.checkpoint, "Trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  embed_cmd->add_option("--corpus", embed.corpus, "Graph corpus (.jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  embed_cmd->add_option("--vocab", embed.vocab,
                        "Class vocabulary (default: <corpus>.vocab.json)");
  embed_cmd->add_option("--out", embed.out, "Output database (.sgdb)")->required();

  QueryArgs query;
  auto* query_cmd = app.add_subcommand("query", "Rank database triplets for a label query");
  AddDbOptions(query_cmd, query.db);
  query_cmd->add_option("--subject", query.subject, "Subject class name");
  query_cmd->add_option("--predicate", query.predicate, "Predicate name");
  query_cmd->add_option("--object", query.object, "Object class name");
  query_cmd->add_option("--mode", query.mode, "s, o, p, s+o or s+p+o")
      ->check(kModeValidator);
  query_cmd->add_option("-k,--k", query.k, "Number of results")
      ->check(CLI::Range(1, 1000000));
  query_cmd->add_flag("--json", query.json, "Print the API response JSON");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Leave-one-out recall@k report");
  AddDbOptions(eval_cmd, eval.db);
  eval_cmd->add_option("--mode", eval.mode, "Query mode or 'all'")
      ->check(kModeValidator | CLI::IsMember({"all"}));
  eval_cmd->add_option("--k", eval.ks, "Comma-separated k values")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--head-fraction", eval.head_fraction)->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--random-baseline", eval.random_seed,
                       "Replace vectors with seeded Gaussian noise");
  eval_cmd->add_option("--out", eval.out, "Write the report here instead of stdout");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON query API");
  AddDbOptions(serve_cmd, serve.db);
  serve_cmd->add_option("--corpus", serve.db.corpus,
                        "Graph corpus for geometry (default: <db>.corpus.jsonl)");
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port)->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == static_cast<int>(CLI::ExitCodes::Success)) return kExitOk;
    err << app.help();
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return RunSynth(synth, out);
    if (*build_cmd) return RunBuildGraphs(build, out);
    if (*train_cmd) return RunTrain(train, *train_cmd, out);
    if (*embed_cmd) return RunEmbed(embed, out);
    if (*query_cmd) return RunQuery(query, out);
    if (*eval_cmd) return RunEval(eval, out);
    if (*serve_cmd) return RunServe(serve, err);
  } catch (const ApiError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace sgir
