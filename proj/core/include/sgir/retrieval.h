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

#ifndef SGIR_RETRIEVAL_H_
#define SGIR_RETRIEVAL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgir/scene_graph.h"
#include "sgir/trainer.h"

namespace sgir {

struct EmbeddingRecord {
  std::uint64_t record_id = 0;
  // Position of the source graph in the corpus the database was built from.
  std::uint64_t image_id = 0;
  std::uint32_t subject_class = 0;
  Predicate predicate = Predicate::kLeftOf;
  std::uint32_t object_class = 0;
  std::vector<double> subject_vec;
  std::vector<double> predicate_vec;
  std::vector<double> object_vec;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) =
      default;
};

// Immutable after construction; safe for concurrent readers.
class EmbeddingDatabase {
 public:
  EmbeddingDatabase() = default;
  // Validates dimensions and finiteness; record ids must equal positions.
  EmbeddingDatabase(int d_embed, std::uint64_t vocab_hash,
                    std::vector<EmbeddingRecord> records);

  int d_embed() const { return d_embed_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  const EmbeddingRecord& record(std::uint64_t id) const;

  friend bool operator==(const EmbeddingDatabase&,
                         const EmbeddingDatabase&) = default;

 private:
  int d_embed_ = 0;
  std::uint64_t vocab_hash_ = 0;
  std::vector<EmbeddingRecord> records_;
};

// One record per triplet per graph, in corpus order; vectors are the final
// encoder outputs of each graph encoded on its own. No occurrence filtering.
// Throws IncompatibleCheckpoint when checkpoint and vocabulary disagree.
EmbeddingDatabase BuildDatabase(const Checkpoint& checkpoint,
                                std::span<const SceneGraph> corpus,
                                const ClassVocabulary& vocab);

// Replaces every vector with seeded standard-normal draws (random baseline).
EmbeddingDatabase RandomizeDatabase(const EmbeddingDatabase& db,
                                    std::uint64_t seed);

// Versioned little-endian file:
//   "SGDB" | version u32 | d_embed u32 | record count u64 | vocab hash u64
//   records: record_id u64 | image_id u64 | subject_class u32 | predicate u8 |
//            object_class u32 | subject, predicate, object float64 x d_embed
std::string SerializeDatabase(const EmbeddingDatabase& db);
EmbeddingDatabase ParseDatabase(std::string_view bytes);
void WriteDatabase(const std::filesystem::path& path,
                   const EmbeddingDatabase& db);
EmbeddingDatabase ReadDatabase(const std::filesystem::path& path);

enum class QueryMode { kS, kO, kP, kSO, kSPO };

inline constexpr QueryMode kAllQueryModes[] = {
    QueryMode::kS, QueryMode::kO, QueryMode::kP, QueryMode::kSO,
    QueryMode::kSPO};

std::string_view QueryModeName(QueryMode mode);  // "s", "o", "p", "s+o", "s+p+o"
std::optional<QueryMode> ParseQueryMode(std::string_view name);
bool UsesSubject(QueryMode mode);
bool UsesPredicate(QueryMode mode);
bool UsesObject(QueryMode mode);
int ComponentCount(QueryMode mode);

struct QueryLabels {
  std::optional<std::uint32_t> subject_class;
  std::optional<Predicate> predicate;
  std::optional<std::uint32_t> object_class;
};

struct QueryVector {
  QueryMode mode = QueryMode::kSPO;
  // Selected components concatenated in s || p || o order.
  std::vector<double> vector;
  QueryLabels labels;
  // Set when the query was formed from a database record.
  std::optional<std::uint64_t> source_record;
};

QueryVector FormQuery(const EmbeddingRecord& record, QueryMode mode);

// Class / predicate centroids used for label-only queries.
class PrototypeIndex {
 public:
  explicit PrototypeIndex(const EmbeddingDatabase& db);

  // Centroid of the subject vectors of records whose subject has this class,
  // falling back to all vectors of the class in either role.
  std::optional<std::vector<double>> Subject(std::uint32_t class_id) const;
  std::optional<std::vector<double>> Object(std::uint32_t class_id) const;
  std::optional<std::vector<double>> PredicateCentroid(Predicate p) const;

 private:
  struct Sum {
    std::vector<double> total;
    std::int64_t count = 0;
  };
  static std::optional<std::vector<double>> Mean(const Sum* primary,
                                                 const Sum* fallback);

  std::map<std::uint32_t, Sum> subject_;
  std::map<std::uint32_t, Sum> object_;
  std::map<std::uint32_t, Sum> any_role_;
  std::map<int, Sum> predicate_;
};

// Throws InvalidArgument when a label required by `mode` is missing and
// UnknownLabel when no database vector carries it.
QueryVector FormLabelQuery(const PrototypeIndex& prototypes,
                           const QueryLabels& labels, QueryMode mode);

struct RankedResult {
  std::uint64_t record_id = 0;
  double distance = 0.0;
  double similarity = 0.0;
  int rank = 0;
};

inline constexpr double kMaxSimilarity = 1e9;
inline constexpr double kZeroDistance = 1e-9;

// 1 / d, capped at kMaxSimilarity when d < kZeroDistance.
double Similarity(double distance);

// Euclidean distance between the query and the record's components selected
// by the query mode, accumulated in s, p, o order.
double QueryDistance(const QueryVector& query, const EmbeddingRecord& record);

// Top-k by ascending distance, ties by record id. The query's source record
// is skipped when `exclude_self`. Throws EmptyDatabase / InvalidArgument.
std::vector<RankedResult> Rank(const EmbeddingDatabase& db,
                               const QueryVector& query, int k,
                               bool exclude_self = true);

// Exact (subject, predicate, object) label match regardless of query mode.
bool IsRelevant(const QueryVector& query, const EmbeddingRecord& record);

// Leave-one-out queries, one per record.
std::vector<QueryVector> LeaveOneOutQueries(const EmbeddingDatabase& db,
                                            QueryMode mode);

struct RecallResult {
  std::vector<int> ks;
  // Fraction of queries with a relevant record in the top k (per-query mean).
  std::vector<double> recall;
  // Mean over distinct (subject, predicate, object) labels of their recall.
  std::vector<double> per_class_recall;
  std::int64_t query_count = 0;
  // Queries with no other relevant record; counted as misses.
  std::int64_t queries_without_relevant = 0;
};

// 1-based rank of the best relevant record (self excluded), or nullopt when
// none exists.
std::optional<std::int64_t> FirstRelevantRank(const EmbeddingDatabase& db,
                                              const QueryVector& query);

// Throws EmptyQuerySet, EmptyDatabase, or InvalidArgument for k < 1.
RecallResult RecallAtK(const EmbeddingDatabase& db,
                       std::span<const QueryVector> queries,
                       std::span<const int> ks);

struct EvalSplit {
  double head_fraction = 0.2;
  // Classes by descending frequency, ties by name.
  std::vector<std::uint32_t> ranked_classes;
  std::vector<bool> is_head;  // indexed by class id
  std::vector<std::uint32_t> head;
  std::vector<std::uint32_t> tail;
};

// Head = the first ceil(head_fraction * C) classes of the frequency ranking.
EvalSplit PartitionClasses(const ClassVocabulary& vocab,
                           double head_fraction = 0.2);

enum class Bucket { kHead, kTail };

// A relationship belongs to the tail when either participant is a tail class.
Bucket QueryBucket(const EvalSplit& split, const QueryVector& query);

struct SplitRecall {
  RecallResult overall;
  std::optional<RecallResult> head;  // absent when no query falls in the bucket
  std::optional<RecallResult> tail;
};

SplitRecall RecallBySplit(const EmbeddingDatabase& db,
                          std::span<const QueryVector> queries,
                          std::span<const int> ks, const EvalSplit& split);

nlohmann::json RecallResultToJson(const RecallResult& r);
// {mode, k, recall: {overall, head, tail}, per_class_recall, db_size,
//  query_count, ...}
nlohmann::json EvaluationToJson(QueryMode mode, const SplitRecall& result,
                                std::size_t db_size);

}  // namespace sgir

#endif  // SGIR_RETRIEVAL_H_
