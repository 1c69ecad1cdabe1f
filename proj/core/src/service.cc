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

#include "sgir/service.h"

#include <cstdlib>
#include <string>

#include <fmt/format.h>

#include "sgir/error.h"

namespace sgir {

using nlohmann::json;

json ApiError::ToJson() const {
  json err = {{"status", status_}, {"message", what()}};
  if (!field_.empty()) err["field"] = field_;
  if (!token_.empty()) err["token"] = token_;
  return {{"error", err}};
}

double WireRound(double value) {
  return std::strtod(fmt::format("{:.9g}", value).c_str(), nullptr);
}

QueryService::QueryService(EmbeddingDatabase db, ClassVocabulary vocab,
                           std::optional<std::vector<SceneGraph>> corpus,
                           double head_fraction)
    : db_(std::move(db)),
      vocab_(std::move(vocab)),
      corpus_(std::move(corpus)),
      split_(PartitionClasses(vocab_, head_fraction)),
      prototypes_(db_),
      predicate_counts_(kNumPredicates, 0) {
  if (db_.vocab_hash() != vocab_.Hash()) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "database was built against a different vocabulary");
  }
  for (const EmbeddingRecord& r : db_.records()) {
    if (r.subject_class >= static_cast<std::uint32_t>(vocab_.size()) ||
        r.object_class >= static_cast<std::uint32_t>(vocab_.size())) {
      throw Error(ErrorCode::kIncompatibleCheckpoint,
                  fmt::format("record {} has a class outside the vocabulary",
                              r.record_id));
    }
    ++predicate_counts_[static_cast<int>(r.predicate)];
  }
  if (!corpus_) return;
  std::uint64_t next = 0;
  for (const SceneGraph& g : *corpus_) {
    first_record_.push_back(next);
    next += g.triplets.size();
  }
  if (next != db_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("corpus has {} triplets but the database has {} "
                            "records",
                            next, db_.size()));
  }
  for (const EmbeddingRecord& r : db_.records()) {
    if (r.image_id >= corpus_->size()) {
      throw Error(ErrorCode::kInvalidArgument, "corpus does not match database");
    }
    const SceneGraph& g = (*corpus_)[r.image_id];
    const std::uint64_t t = r.record_id - first_record_[r.image_id];
    if (t >= g.triplets.size() || g.triplets[t].predicate != r.predicate ||
        static_cast<std::uint32_t>(
            g.objects[g.triplets[t].subject_id].class_id) != r.subject_class ||
        static_cast<std::uint32_t>(
            g.objects[g.triplets[t].object_id].class_id) != r.object_class) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("corpus does not match database at record {}",
                              r.record_id));
    }
  }
}

json QueryService::Vocab() const {
  json classes = json::array();
  for (int c = 0; c < vocab_.size(); ++c) {
    classes.push_back({{"id", c},
                       {"name", vocab_.names[c]},
                       {"frequency", vocab_.frequencies[c]},
                       {"tail", !split_.is_head[c]}});
  }
  json predicates = json::array();
  for (int p = 0; p < kNumPredicates; ++p) {
    predicates.push_back({{"id", p},
                          {"name", PredicateName(PredicateFromIndex(p))},
                          {"frequency", predicate_counts_[p]}});
  }
  return {{"classes", classes},
          {"predicates", predicates},
          {"head_fraction", split_.head_fraction}};
}

namespace {

std::optional<std::string> OptionalString(const json& request,
                                          const char* field) {
  auto it = request.find(field);
  if (it == request.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ApiError(400, fmt::format("'{}' must be a string", field), field);
  }
  std::string value = it->get<std::string>();
  if (value.empty()) return std::nullopt;
  return value;
}

QueryMode DeriveMode(bool s, bool p, bool o) {
  if (s && p && o) return QueryMode::kSPO;
  if (s && o && !p) return QueryMode::kSO;
  if (s && !p && !o) return QueryMode::kS;
  if (o && !s && !p) return QueryMode::kO;
  if (p && !s && !o) return QueryMode::kP;
  throw ApiError(400,
                 "cannot derive a mode from the given fields; supported: s, o, "
                 "p, s+o, s+p+o",
                 "mode");
}

}  // namespace

json QueryService::Labels(std::uint32_t subject, Predicate predicate,
                          std::uint32_t object) const {
  return {{"subject", vocab_.names[subject]},
          {"predicate", PredicateName(predicate)},
          {"object", vocab_.names[object]}};
}

json QueryService::Query(const json& request) const {
  if (!request.is_object()) {
    throw ApiError(400, "request body must be a JSON object");
  }
  for (const auto& [key, value] : request.items()) {
    if (key != "subject" && key != "predicate" && key != "object" &&
        key != "mode" && key != "k") {
      throw ApiError(400, fmt::format("unknown field '{}'", key), key);
    }
  }
  const auto subject = OptionalString(request, "subject");
  const auto predicate = OptionalString(request, "predicate");
  const auto object = OptionalString(request, "object");

  QueryMode mode;
  if (const auto mode_name = OptionalString(request, "mode")) {
    const auto parsed = ParseQueryMode(*mode_name);
    if (!parsed) {
      throw ApiError(400, fmt::format("unknown mode '{}'", *mode_name), "mode",
                     *mode_name);
    }
    mode = *parsed;
  } else {
    mode = DeriveMode(subject.has_value(), predicate.has_value(),
                      object.has_value());
  }
  auto require = [&](bool needed, const std::optional<std::string>& value,
                     const char* field) {
    if (needed && !value) {
      throw ApiError(400,
                     fmt::format("mode {} requires '{}'", QueryModeName(mode),
                                 field),
                     field);
    }
  };
  require(UsesSubject(mode), subject, "subject");
  require(UsesPredicate(mode), predicate, "predicate");
  require(UsesObject(mode), object, "object");

  int k = 10;
  if (auto it = request.find("k"); it != request.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1 ||
        it->get<std::int64_t>() > 1000000) {
      throw ApiError(400, "'k' must be an integer >= 1", "k");
    }
    k = it->get<int>();
  }

  QueryLabels labels;
  auto resolve_class = [&](const std::optional<std::string>& name,
                           const char* field) -> std::optional<std::uint32_t> {
    if (!name) return std::nullopt;
    const auto id = vocab_.Find(*name);
    if (!id) {
      throw ApiError(422, fmt::format("unknown class '{}'", *name), field,
                     *name);
    }
    return static_cast<std::uint32_t>(*id);
  };
  labels.subject_class = resolve_class(subject, "subject");
  labels.object_class = resolve_class(object, "object");
  if (predicate) {
    labels.predicate = ParsePredicate(*predicate);
    if (!labels.predicate) {
      throw ApiError(422, fmt::format("unknown predicate '{}'", *predicate),
                     "predicate", *predicate);
    }
  }

  QueryVector query;
  try {
    query = FormLabelQuery(prototypes_, labels, mode);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnknownLabel) throw;
    // Known name with no vector in this database.
    std::string field = "predicate";
    std::string token = predicate.value_or("");
    if (UsesSubject(mode) && !prototypes_.Subject(*labels.subject_class)) {
      field = "subject";
      token = *subject;
    } else if (UsesObject(mode) && !prototypes_.Object(*labels.object_class)) {
      field = "object";
      token = *object;
    }
    throw ApiError(422, e.what(), field, token);
  }
  const std::vector<RankedResult> ranked = Rank(db_, query, k, false);
  ++queries_served_;

  json echo = {{"mode", QueryModeName(mode)}, {"k", k}};
  echo["subject"] = labels.subject_class
                        ? json(vocab_.names[*labels.subject_class])
                        : json(nullptr);
  echo["predicate"] = labels.predicate
                          ? json(PredicateName(*labels.predicate))
                          : json(nullptr);
  echo["object"] = labels.object_class
                       ? json(vocab_.names[*labels.object_class])
                       : json(nullptr);
  json results = json::array();
  for (const RankedResult& r : ranked) {
    const EmbeddingRecord& rec = db_.record(r.record_id);
    const bool exact =
        (!labels.subject_class || *labels.subject_class == rec.subject_class) &&
        (!labels.predicate || *labels.predicate == rec.predicate) &&
        (!labels.object_class || *labels.object_class == rec.object_class);
    results.push_back(
        {{"rank", r.rank},
         {"record_id", r.record_id},
         {"image_id", rec.image_id},
         {"labels", Labels(rec.subject_class, rec.predicate, rec.object_class)},
         {"distance", WireRound(r.distance)},
         {"similarity", WireRound(r.similarity)},
         {"exact_match", exact}});
  }
  return {{"query", echo}, {"results", results}};
}

json QueryService::QueryText(const std::string& body) const {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::exception& e) {
    throw ApiError(400, fmt::format("malformed JSON: {}", e.what()));
  }
  return Query(request);
}

json QueryService::Record(std::uint64_t record_id) const {
  if (record_id >= db_.size()) {
    throw ApiError(404, fmt::format("no record {}", record_id), "id",
                   std::to_string(record_id));
  }
  const EmbeddingRecord& rec = db_.record(record_id);
  json out = {{"record_id", rec.record_id},
              {"image_id", rec.image_id},
              {"labels", Labels(rec.subject_class, rec.predicate,
                                rec.object_class)},
              {"geometry", nullptr}};
  if (corpus_) {
    const SceneGraph& g = (*corpus_)[rec.image_id];
    const Triplet& t = g.triplets[rec.record_id - first_record_[rec.image_id]];
    const Box& s = g.objects[t.subject_id].box;
    const Box& o = g.objects[t.object_id].box;
    out["image_name"] = g.image_id;
    out["geometry"] = {{"subject_box", s.ToArray()},
                       {"object_box", o.ToArray()},
                       {"superbox", Superbox(s, o).ToArray()}};
  }
  return out;
}

json QueryService::Health() const {
  return {{"status", "ok"},
          {"records", db_.size()},
          {"d_embed", db_.d_embed()},
          {"classes", vocab_.size()},
          {"has_corpus", corpus_.has_value()},
          {"queries_served", queries_served_.load()}};
}

}  // namespace sgir
