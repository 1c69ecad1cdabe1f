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

#include "sgir/corpus_io.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sgir/error.h"

namespace sgir {

using nlohmann::json;

json SceneGraphToJson(const SceneGraph& graph) {
  json objects = json::array();
  for (const ObjectNode& node : graph.objects) {
    objects.push_back({{"class", node.class_id},
                       {"box", {node.box.x0, node.box.y0, node.box.x1,
                                node.box.y1}}});
  }
  json triplets = json::array();
  for (const Triplet& t : graph.triplets) {
    triplets.push_back(
        {t.subject_id, static_cast<int>(t.predicate), t.object_id});
  }
  return {{"image_id", graph.image_id},
          {"objects", std::move(objects)},
          {"triplets", std::move(triplets)}};
}

SceneGraph SceneGraphFromJson(const json& row) {
  try {
    SceneGraph graph;
    graph.image_id = row.at("image_id").get<std::string>();
    for (const json& obj : row.at("objects")) {
      const json& b = obj.at("box");
      if (!b.is_array() || b.size() != 4) {
        throw Error(ErrorCode::kMalformedFile, "box must have 4 numbers");
      }
      const int id = static_cast<int>(graph.objects.size());
      graph.objects.push_back(ObjectNode{
          id, obj.at("class").get<int>(),
          Box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
              b[3].get<double>()}});
    }
    for (const json& t : row.at("triplets")) {
      if (!t.is_array() || t.size() != 3) {
        throw Error(ErrorCode::kMalformedFile, "triplet must have 3 entries");
      }
      graph.triplets.push_back(Triplet{t[0].get<int>(),
                                       PredicateFromIndex(t[1].get<int>()),
                                       t[2].get<int>()});
    }
    return graph;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile,
                fmt::format("bad scene graph row: {}", e.what()));
  }
}

std::string SerializeGraphCorpus(std::span<const SceneGraph> graphs) {
  std::string out;
  for (const SceneGraph& graph : graphs) {
    out += SceneGraphToJson(graph).dump();
    out += '\n';
  }
  return out;
}

std::vector<SceneGraph> ParseGraphCorpus(const std::string& text) {
  std::vector<SceneGraph> graphs;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedFile,
                  fmt::format("line {}: {}", line_no, e.what()));
    }
    graphs.push_back(SceneGraphFromJson(row));
  }
  return graphs;
}

void WriteGraphCorpus(const std::filesystem::path& path,
                      std::span<const SceneGraph> graphs) {
  WriteTextFile(path, SerializeGraphCorpus(graphs));
}

std::vector<SceneGraph> ReadGraphCorpus(const std::filesystem::path& path) {
  return ParseGraphCorpus(ReadTextFile(path));
}

json VocabularyToJson(const ClassVocabulary& vocab) {
  return {{"names", vocab.names}, {"frequencies", vocab.frequencies}};
}

ClassVocabulary VocabularyFromJson(const json& doc) {
  ClassVocabulary vocab;
  try {
    vocab.names = doc.at("names").get<std::vector<std::string>>();
    if (doc.contains("frequencies")) {
      vocab.frequencies = doc.at("frequencies").get<std::vector<std::int64_t>>();
    } else {
      vocab.frequencies.assign(vocab.names.size(), 0);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile,
                fmt::format("bad vocabulary: {}", e.what()));
  }
  vocab.Validate();
  return vocab;
}

void WriteVocabulary(const std::filesystem::path& path,
                     const ClassVocabulary& vocab) {
  WriteTextFile(path, VocabularyToJson(vocab).dump(2) + "\n");
}

ClassVocabulary ReadVocabulary(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile,
                fmt::format("{}: {}", path.string(), e.what()));
  }
  return VocabularyFromJson(doc);
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIo, fmt::format("cannot write {}", tmp.string()));
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
      throw Error(ErrorCode::kIo, fmt::format("short write to {}", tmp.string()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, fmt::format("cannot rename to {}: {}",
                                            path.string(), ec.message()));
  }
}

}  // namespace sgir
