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

#ifndef SGIR_SERVICE_H_
#define SGIR_SERVICE_H_

#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgir/retrieval.h"
#include "sgir/scene_graph.h"

namespace sgir {

// Request-level failure carrying the HTTP status it maps to
// (400 malformed request, 404 unknown record, 422 unknown label).
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string message, std::string field = {},
           std::string token = {})
      : std::runtime_error(message),
        status_(status),
        field_(std::move(field)),
        token_(std::move(token)) {}

  int status() const { return status_; }
  const std::string& field() const { return field_; }
  const std::string& token() const { return token_; }
  // {"error": {"status", "message", "field"?, "token"?}}
  nlohmann::json ToJson() const;

 private:
  int status_;
  std::string field_;
  std::string token_;
};

// Rounds to 9 significant decimal digits, the wire precision for distances.
double WireRound(double value);

// Query front end over a frozen database. Shared by `sgir query` and the
// HTTP server so both produce identical responses. Thread-safe.
class QueryService {
 public:
  // Throws IncompatibleCheckpoint when the database was built against a
  // different vocabulary, InvalidArgument when `corpus` does not match it.
  QueryService(EmbeddingDatabase db, ClassVocabulary vocab,
               std::optional<std::vector<SceneGraph>> corpus = std::nullopt,
               double head_fraction = 0.2);

  // {"classes": [{id, name, frequency, tail}], "predicates": [{id, name,
  //  frequency}], "head_fraction"}
  nlohmann::json Vocab() const;

  // Request {"subject"?, "predicate"?, "object"?, "mode"?, "k"?}. The mode is
  // derived from the filled fields when absent; k defaults to 10.
  // Response {"query": {...}, "results": [{rank, record_id, image_id,
  //  labels, distance, similarity, exact_match}]}.
  nlohmann::json Query(const nlohmann::json& request) const;
  nlohmann::json QueryText(const std::string& body) const;

  // Record labels plus subject, object and superbox geometry when a corpus
  // is attached. Throws ApiError 404 for unknown ids.
  nlohmann::json Record(std::uint64_t record_id) const;
  nlohmann::json Health() const;

  const EmbeddingDatabase& db() const { return db_; }
  const ClassVocabulary& vocab() const { return vocab_; }

 private:
  nlohmann::json Labels(std::uint32_t subject, Predicate predicate,
                        std::uint32_t object) const;

  EmbeddingDatabase db_;
  ClassVocabulary vocab_;
  std::optional<std::vector<SceneGraph>> corpus_;
  // First record id of each corpus graph.
  std::vector<std::uint64_t> first_record_;
  EvalSplit split_;
  PrototypeIndex prototypes_;
  std::vector<std::int64_t> predicate_counts_;
  mutable std::atomic<std::uint64_t> queries_served_{0};
};

}  // namespace sgir

#endif  // SGIR_SERVICE_H_
