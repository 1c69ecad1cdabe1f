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

#include "sgir/retrieval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "sgir/binary_io.h"
#include "sgir/corpus_io.h"
#include "sgir/error.h"
#include "sgir/random.h"

namespace sgir {

using nlohmann::json;

EmbeddingDatabase::EmbeddingDatabase(int d_embed, std::uint64_t vocab_hash,
                                     std::vector<EmbeddingRecord> records)
    : d_embed_(d_embed), vocab_hash_(vocab_hash), records_(std::move(records)) {
  if (d_embed_ <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "d_embed must be positive");
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const EmbeddingRecord& r = records_[i];
    if (r.record_id != i) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("record {} stored at position {}", r.record_id, i));
    }
    for (const auto* v : {&r.subject_vec, &r.predicate_vec, &r.object_vec}) {
      if (static_cast<int>(v->size()) != d_embed_) {
        throw Error(ErrorCode::kShapeMismatch,
                    fmt::format("record {} vector has {} entries, expected {}",
                                i, v->size(), d_embed_));
      }
      for (const double x : *v) {
        if (!std::isfinite(x)) {
          throw Error(ErrorCode::kNonFinite,
                      fmt::format("record {} holds a non-finite value", i));
        }
      }
    }
    if (static_cast<int>(r.predicate) >= kNumPredicates) {
      throw Error(ErrorCode::kInvalidArgument, "record predicate out of range");
    }
  }
}

const EmbeddingRecord& EmbeddingDatabase::record(std::uint64_t id) const {
  if (id >= records_.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                fmt::format("no record {} in database of {}", id,
                            records_.size()));
  }
  return records_[id];
}

EmbeddingDatabase BuildDatabase(const Checkpoint& checkpoint,
                                std::span<const SceneGraph> corpus,
                                const ClassVocabulary& vocab) {
  CheckCompatible(checkpoint, vocab);
  ParamStore params = checkpoint.params;
  const std::int64_t d = checkpoint.config.d_embed;
  std::vector<EmbeddingRecord> records;
  for (std::size_t g = 0; g < corpus.size(); ++g) {
    const SceneGraph& graph = corpus[g];
    ValidateSceneGraph(graph, vocab.size());
    if (graph.triplets.empty()) continue;
    Tape tape;
    const EmbeddingSet emb = EncodeGraph(tape, graph, params, checkpoint.config);
    const Tensor& obj = emb.objects.value();
    const Tensor& pred = emb.predicates.value();
    auto row = [d](const Tensor& m, std::int64_t r) {
      return std::vector<double>(m.raw() + r * d, m.raw() + (r + 1) * d);
    };
    for (std::size_t t = 0; t < graph.triplets.size(); ++t) {
      const Triplet& trip = graph.triplets[t];
      EmbeddingRecord rec;
      rec.record_id = records.size();
      rec.image_id = g;
      rec.subject_class =
          static_cast<std::uint32_t>(graph.objects[trip.subject_id].class_id);
      rec.predicate = trip.predicate;
      rec.object_class =
          static_cast<std::uint32_t>(graph.objects[trip.object_id].class_id);
      rec.subject_vec = row(obj, trip.subject_id);
      rec.predicate_vec = row(pred, static_cast<std::int64_t>(t));
      rec.object_vec = row(obj, trip.object_id);
      records.push_back(std::move(rec));
    }
  }
  return EmbeddingDatabase(static_cast<int>(d), checkpoint.vocab_hash,
                           std::move(records));
}

EmbeddingDatabase RandomizeDatabase(const EmbeddingDatabase& db,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EmbeddingRecord> records = db.records();
  for (EmbeddingRecord& r : records) {
    for (auto* v : {&r.subject_vec, &r.predicate_vec, &r.object_vec}) {
      for (double& x : *v) x = rng.Normal();
    }
  }
  return EmbeddingDatabase(db.d_embed(), db.vocab_hash(), std::move(records));
}

namespace {

constexpr char kDbMagic[4] = {'S', 'G', 'D', 'B'};
constexpr std::uint32_t kDbVersion = 1;

}  // namespace

std::string SerializeDatabase(const EmbeddingDatabase& db) {
  ByteWriter w;
  w.Bytes(std::string_view(kDbMagic, 4));
  w.U32(kDbVersion);
  w.U32(static_cast<std::uint32_t>(db.d_embed()));
  w.U64(db.size());
  w.U64(db.vocab_hash());
  for (const EmbeddingRecord& r : db.records()) {
    w.U64(r.record_id);
    w.U64(r.image_id);
    w.U32(r.subject_class);
    w.U8(static_cast<std::uint8_t>(r.predicate));
    w.U32(r.object_class);
    for (const auto* v : {&r.subject_vec, &r.predicate_vec, &r.object_vec}) {
      for (const double x : *v) w.F64(x);
    }
  }
  return w.Release();
}

EmbeddingDatabase ParseDatabase(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.Bytes(4) != std::string_view(kDbMagic, 4)) {
    throw Error(ErrorCode::kMalformedFile, "not an SGDB embedding database");
  }
  const std::uint32_t version = r.U32();
  if (version != kDbVersion) {
    throw Error(ErrorCode::kMalformedFile,
                fmt::format("unsupported database version {}", version));
  }
  const std::uint32_t d = r.U32();
  const std::uint64_t count = r.U64();
  const std::uint64_t vocab_hash = r.U64();
  const std::uint64_t record_bytes = 8 + 8 + 4 + 1 + 4 + 3ULL * 8 * d;
  if (d == 0 || count > r.remaining() / record_bytes) {
    throw Error(ErrorCode::kMalformedFile, "record count exceeds file size");
  }
  std::vector<EmbeddingRecord> records(count);
  for (EmbeddingRecord& rec : records) {
    rec.record_id = r.U64();
    rec.image_id = r.U64();
    rec.subject_class = r.U32();
    const std::uint8_t p = r.U8();
    if (p >= kNumPredicates) {
      throw Error(ErrorCode::kMalformedFile, "predicate index out of range");
    }
    rec.predicate = static_cast<Predicate>(p);
    rec.object_class = r.U32();
    for (auto* v : {&rec.subject_vec, &rec.predicate_vec, &rec.object_vec}) {
      v->resize(d);
      for (double& x : *v) x = r.F64();
    }
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kMalformedFile, "trailing bytes after records");
  }
  try {
    return EmbeddingDatabase(static_cast<int>(d), vocab_hash, std::move(records));
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
}

void WriteDatabase(const std::filesystem::path& path,
                   const EmbeddingDatabase& db) {
  WriteTextFile(path, SerializeDatabase(db));
}

EmbeddingDatabase ReadDatabase(const std::filesystem::path& path) {
  return ParseDatabase(ReadTextFile(path));
}

std::string_view QueryModeName(QueryMode mode) {
  switch (mode) {
    case QueryMode::kS: return "s";
    case QueryMode::kO: return "o";
    case QueryMode::kP: return "p";
    case QueryMode::kSO: return "s+o";
    case QueryMode::kSPO: return "s+p+o";
  }
  return "?";
}

std::optional<QueryMode> ParseQueryMode(std::string_view name) {
  for (const QueryMode m : kAllQueryModes) {
    if (QueryModeName(m) == name) return m;
  }
  if (name == "so") return QueryMode::kSO;
  if (name == "spo") return QueryMode::kSPO;
  return std::nullopt;
}

bool UsesSubject(QueryMode m) {
  return m == QueryMode::kS || m == QueryMode::kSO || m == QueryMode::kSPO;
}
bool UsesPredicate(QueryMode m) {
  return m == QueryMode::kP || m == QueryMode::kSPO;
}
bool UsesObject(QueryMode m) {
  return m == QueryMode::kO || m == QueryMode::kSO || m == QueryMode::kSPO;
}
int ComponentCount(QueryMode m) {
  return int{UsesSubject(m)} + int{UsesPredicate(m)} + int{UsesObject(m)};
}

QueryVector FormQuery(const EmbeddingRecord& record, QueryMode mode) {
  QueryVector q;
  q.mode = mode;
  if (UsesSubject(mode)) {
    q.vector.insert(q.vector.end(), record.subject_vec.begin(),
                    record.subject_vec.end());
  }
  if (UsesPredicate(mode)) {
    q.vector.insert(q.vector.end(), record.predicate_vec.begin(),
                    record.predicate_vec.end());
  }
  if (UsesObject(mode)) {
    q.vector.insert(q.vector.end(), record.object_vec.begin(),
                    record.object_vec.end());
  }
  q.labels = {record.subject_class, record.predicate, record.object_class};
  q.source_record = record.record_id;
  return q;
}

PrototypeIndex::PrototypeIndex(const EmbeddingDatabase& db) {
  auto add = [](Sum& s, const std::vector<double>& v) {
    if (s.total.empty()) s.total.assign(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) s.total[i] += v[i];
    ++s.count;
  };
  for (const EmbeddingRecord& r : db.records()) {
    add(subject_[r.subject_class], r.subject_vec);
    add(object_[r.object_class], r.object_vec);
    add(any_role_[r.subject_class], r.subject_vec);
    add(any_role_[r.object_class], r.object_vec);
    add(predicate_[static_cast<int>(r.predicate)], r.predicate_vec);
  }
}

std::optional<std::vector<double>> PrototypeIndex::Mean(const Sum* primary,
                                                        const Sum* fallback) {
  const Sum* s = primary != nullptr ? primary : fallback;
  if (s == nullptr || s->count == 0) return std::nullopt;
  std::vector<double> mean = s->total;
  for (double& x : mean) x /= static_cast<double>(s->count);
  return mean;
}

namespace {

template <typename Map, typename Key>
const typename Map::mapped_type* Lookup(const Map& m, const Key& key) {
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

}  // namespace

std::optional<std::vector<double>> PrototypeIndex::Subject(
    std::uint32_t class_id) const {
  return Mean(Lookup(subject_, class_id), Lookup(any_role_, class_id));
}

std::optional<std::vector<double>> PrototypeIndex::Object(
    std::uint32_t class_id) const {
  return Mean(Lookup(object_, class_id), Lookup(any_role_, class_id));
}

std::optional<std::vector<double>> PrototypeIndex::PredicateCentroid(
    Predicate p) const {
  return Mean(Lookup(predicate_, static_cast<int>(p)), nullptr);
}

QueryVector FormLabelQuery(const PrototypeIndex& prototypes,
                           const QueryLabels& labels, QueryMode mode) {
  QueryVector q;
  q.mode = mode;
  q.labels = labels;
  auto append = [&](const std::optional<std::vector<double>>& v,
                    const std::string& what) {
    if (!v) {
      throw Error(ErrorCode::kUnknownLabel,
                  fmt::format("no database vector carries {}", what));
    }
    q.vector.insert(q.vector.end(), v->begin(), v->end());
  };
  if (UsesSubject(mode)) {
    if (!labels.subject_class) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("mode {} needs a subject", QueryModeName(mode)));
    }
    append(prototypes.Subject(*labels.subject_class),
           fmt::format("subject class {}", *labels.subject_class));
  }
  if (UsesPredicate(mode)) {
    if (!labels.predicate) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("mode {} needs a predicate", QueryModeName(mode)));
    }
    append(prototypes.PredicateCentroid(*labels.predicate),
           fmt::format("predicate '{}'", PredicateName(*labels.predicate)));
  }
  if (UsesObject(mode)) {
    if (!labels.object_class) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("mode {} needs an object", QueryModeName(mode)));
    }
    append(prototypes.Object(*labels.object_class),
           fmt::format("object class {}", *labels.object_class));
  }
  return q;
}

double Similarity(double distance) {
  return distance < kZeroDistance ? kMaxSimilarity : 1.0 / distance;
}

double QueryDistance(const QueryVector& query, const EmbeddingRecord& record) {
  const std::size_t d = record.subject_vec.size();
  if (query.vector.size() != d * ComponentCount(query.mode)) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("query of length {} for mode {} with d = {}",
                            query.vector.size(), QueryModeName(query.mode), d));
  }
  double sum = 0.0;
  std::size_t offset = 0;
  auto accumulate = [&](const std::vector<double>& part) {
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = query.vector[offset + i] - part[i];
      sum += diff * diff;
    }
    offset += d;
  };
  if (UsesSubject(query.mode)) accumulate(record.subject_vec);
  if (UsesPredicate(query.mode)) accumulate(record.predicate_vec);
  if (UsesObject(query.mode)) accumulate(record.object_vec);
  return std::sqrt(sum);
}

std::vector<RankedResult> Rank(const EmbeddingDatabase& db,
                               const QueryVector& query, int k,
                               bool exclude_self) {
  if (db.empty()) throw Error(ErrorCode::kEmptyDatabase, "database is empty");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  std::vector<std::pair<double, std::uint64_t>> scored;
  scored.reserve(db.size());
  for (const EmbeddingRecord& r : db.records()) {
    if (exclude_self && query.source_record == r.record_id) continue;
    scored.emplace_back(QueryDistance(query, r), r.record_id);
  }
  const std::size_t n = std::min<std::size_t>(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + n, scored.end());
  std::vector<RankedResult> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(RankedResult{scored[i].second, scored[i].first,
                               Similarity(scored[i].first),
                               static_cast<int>(i + 1)});
  }
  return out;
}

bool IsRelevant(const QueryVector& query, const EmbeddingRecord& record) {
  const QueryLabels& l = query.labels;
  return l.subject_class && l.predicate && l.object_class &&
         *l.subject_class == record.subject_class &&
         *l.predicate == record.predicate &&
         *l.object_class == record.object_class;
}

std::vector<QueryVector> LeaveOneOutQueries(const EmbeddingDatabase& db,
                                            QueryMode mode) {
  std::vector<QueryVector> queries;
  queries.reserve(db.size());
  for (const EmbeddingRecord& r : db.records()) {
    queries.push_back(FormQuery(r, mode));
  }
  return queries;
}

std::optional<std::int64_t> FirstRelevantRank(const EmbeddingDatabase& db,
                                              const QueryVector& query) {
  std::vector<std::pair<double, std::uint64_t>> scored;
  scored.reserve(db.size());
  std::optional<std::pair<double, std::uint64_t>> best;
  for (const EmbeddingRecord& r : db.records()) {
    if (query.source_record == r.record_id) continue;
    const std::pair<double, std::uint64_t> key{QueryDistance(query, r),
                                               r.record_id};
    scored.push_back(key);
    if (IsRelevant(query, r) && (!best || key < *best)) best = key;
  }
  if (!best) return std::nullopt;
  std::int64_t ahead = 0;
  for (const auto& key : scored) {
    if (key < *best) ++ahead;
  }
  return ahead + 1;
}

namespace {

std::tuple<std::uint32_t, int, std::uint32_t> LabelKey(const QueryVector& q) {
  return {q.labels.subject_class.value_or(UINT32_MAX),
          q.labels.predicate ? static_cast<int>(*q.labels.predicate) : -1,
          q.labels.object_class.value_or(UINT32_MAX)};
}

}  // namespace

RecallResult RecallAtK(const EmbeddingDatabase& db,
                       std::span<const QueryVector> queries,
                       std::span<const int> ks) {
  if (queries.empty()) {
    throw Error(ErrorCode::kEmptyQuerySet, "no queries to evaluate");
  }
  if (db.empty()) throw Error(ErrorCode::kEmptyDatabase, "database is empty");
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "no k values");
  for (const int k : ks) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  }
  RecallResult result;
  result.ks.assign(ks.begin(), ks.end());
  result.query_count = static_cast<std::int64_t>(queries.size());
  std::vector<std::int64_t> hits(ks.size(), 0);
  std::map<std::tuple<std::uint32_t, int, std::uint32_t>,
           std::pair<std::vector<std::int64_t>, std::int64_t>>
      per_class;
  for (const QueryVector& q : queries) {
    const std::optional<std::int64_t> first = FirstRelevantRank(db, q);
    if (!first) ++result.queries_without_relevant;
    auto& [class_hits, class_count] = per_class[LabelKey(q)];
    class_hits.resize(ks.size(), 0);
    ++class_count;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (first && *first <= ks[i]) {
        ++hits[i];
        ++class_hits[i];
      }
    }
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    result.recall.push_back(static_cast<double>(hits[i]) /
                            static_cast<double>(queries.size()));
    double class_sum = 0.0;
    for (const auto& [key, entry] : per_class) {
      class_sum += static_cast<double>(entry.first[i]) /
                   static_cast<double>(entry.second);
    }
    result.per_class_recall.push_back(class_sum /
                                      static_cast<double>(per_class.size()));
  }
  return result;
}

EvalSplit PartitionClasses(const ClassVocabulary& vocab, double head_fraction) {
  vocab.Validate();
  if (!(head_fraction >= 0.0 && head_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "head fraction must be in [0, 1]");
  }
  EvalSplit split;
  split.head_fraction = head_fraction;
  const int c = vocab.size();
  split.ranked_classes.resize(c);
  std::iota(split.ranked_classes.begin(), split.ranked_classes.end(), 0u);
  std::sort(split.ranked_classes.begin(), split.ranked_classes.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              if (vocab.frequencies[a] != vocab.frequencies[b]) {
                return vocab.frequencies[a] > vocab.frequencies[b];
              }
              return vocab.names[a] < vocab.names[b];
            });
  // The small slack keeps products such as 0.2 * 15 = 3.0000000000000004
  // from rounding up.
  const auto head_count = static_cast<std::size_t>(
      std::ceil(head_fraction * static_cast<double>(c) - 1e-9));
  split.is_head.assign(c, false);
  for (std::size_t i = 0; i < split.ranked_classes.size(); ++i) {
    const std::uint32_t cls = split.ranked_classes[i];
    if (i < head_count) {
      split.is_head[cls] = true;
      split.head.push_back(cls);
    } else {
      split.tail.push_back(cls);
    }
  }
  return split;
}

Bucket QueryBucket(const EvalSplit& split, const QueryVector& query) {
  auto is_head = [&](const std::optional<std::uint32_t>& cls) {
    return !cls || (*cls < split.is_head.size() && split.is_head[*cls]);
  };
  return is_head(query.labels.subject_class) && is_head(query.labels.object_class)
             ? Bucket::kHead
             : Bucket::kTail;
}

SplitRecall RecallBySplit(const EmbeddingDatabase& db,
                          std::span<const QueryVector> queries,
                          std::span<const int> ks, const EvalSplit& split) {
  SplitRecall out;
  out.overall = RecallAtK(db, queries, ks);
  std::vector<QueryVector> head, tail;
  for (const QueryVector& q : queries) {
    (QueryBucket(split, q) == Bucket::kHead ? head : tail).push_back(q);
  }
  if (!head.empty()) out.head = RecallAtK(db, head, ks);
  if (!tail.empty()) out.tail = RecallAtK(db, tail, ks);
  return out;
}

json RecallResultToJson(const RecallResult& r) {
  return {{"k", r.ks},
          {"recall", r.recall},
          {"per_class_recall", r.per_class_recall},
          {"query_count", r.query_count},
          {"queries_without_relevant", r.queries_without_relevant}};
}

json EvaluationToJson(QueryMode mode, const SplitRecall& result,
                      std::size_t db_size) {
  auto bucket = [](const std::optional<RecallResult>& r) -> json {
    return r ? json(r->recall) : json(nullptr);
  };
  auto bucket_count = [](const std::optional<RecallResult>& r) -> json {
    return r ? json(r->query_count) : json(0);
  };
  return {{"mode", QueryModeName(mode)},
          {"k", result.overall.ks},
          {"recall",
           {{"overall", result.overall.recall},
            {"head", bucket(result.head)},
            {"tail", bucket(result.tail)}}},
          {"per_class_recall", result.overall.per_class_recall},
          {"db_size", db_size},
          {"query_count", result.overall.query_count},
          {"head_query_count", bucket_count(result.head)},
          {"tail_query_count", bucket_count(result.tail)},
          {"queries_without_relevant", result.overall.queries_without_relevant}};
}

}  // namespace sgir
