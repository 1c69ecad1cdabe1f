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

#include <algorithm>
#include <cmath>
#include <thread>

#include "sgir/service.h"
#include "service_fixture.h"

namespace sgir {
namespace {

using nlohmann::json;

// Expects an ApiError with the given status, field and token.
void ExpectApiError(const std::function<void()>& fn, int status,
                    const std::string& field = {}, const std::string& token = {}) {
  try {
    fn();
    ADD_FAILURE() << "no ApiError";
  } catch (const ApiError& e) {
    EXPECT_EQ(e.status(), status) << e.what();
    EXPECT_EQ(e.field(), field) << e.what();
    EXPECT_EQ(e.token(), token) << e.what();
    const json j = e.ToJson();
    EXPECT_EQ(j["error"]["status"], status);
    EXPECT_EQ(j["error"].contains("token"), !token.empty());
  }
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    index_ = new sgir::testing::TinyIndex(sgir::testing::MakeTinyIndex());
    service_ = new QueryService(index_->db, index_->vocab, index_->corpus);
  }
  static void TearDownTestSuite() {
    delete service_;
    delete index_;
  }

  // A class name that appears as a subject and as an object.
  static std::string CommonClass() {
    return index_->vocab.names[index_->db.record(0).subject_class];
  }

  static sgir::testing::TinyIndex* index_;
  static QueryService* service_;
};

sgir::testing::TinyIndex* ServiceTest::index_ = nullptr;
QueryService* ServiceTest::service_ = nullptr;

TEST(WireRoundTest, NineSignificantDigits) {
  EXPECT_EQ(WireRound(1.0), 1.0);
  EXPECT_EQ(WireRound(0.1234567894), 0.123456789);
  EXPECT_EQ(WireRound(0.1234567896), 0.12345679);
  EXPECT_EQ(WireRound(123456789012.0), 123456789000.0);
  EXPECT_EQ(WireRound(1e9), 1e9);
}

TEST_F(ServiceTest, QueryMatchesIndependentCentroidRanking) {
  const auto& db = index_->db;
  const std::uint32_t s = db.record(0).subject_class;
  const std::uint32_t o = db.record(0).object_class;
  const int d = db.d_embed();
  // Centroid over records with the class in the given role.
  auto centroid = [&](std::uint32_t c, bool subject) {
    std::vector<double> m(d, 0.0);
    int n = 0;
    for (const EmbeddingRecord& r : db.records()) {
      if ((subject ? r.subject_class : r.object_class) != c) continue;
      const auto& v = subject ? r.subject_vec : r.object_vec;
      for (int i = 0; i < d; ++i) m[i] += v[i];
      ++n;
    }
    for (double& x : m) x /= n;
    return m;
  };
  const auto qs = centroid(s, true), qo = centroid(o, false);
  std::vector<std::pair<double, std::uint64_t>> oracle;
  for (const EmbeddingRecord& r : db.records()) {
    double acc = 0;
    for (int i = 0; i < d; ++i) acc += (qs[i] - r.subject_vec[i]) * (qs[i] - r.subject_vec[i]);
    for (int i = 0; i < d; ++i) acc += (qo[i] - r.object_vec[i]) * (qo[i] - r.object_vec[i]);
    oracle.emplace_back(std::sqrt(acc), r.record_id);
  }
  std::sort(oracle.begin(), oracle.end());

  const json response = service_->Query(
      {{"subject", index_->vocab.names[s]}, {"object", index_->vocab.names[o]}, {"k", 7}});
  EXPECT_EQ(response["query"]["mode"], "s+o");
  EXPECT_EQ(response["query"]["k"], 7);
  EXPECT_TRUE(response["query"]["predicate"].is_null());
  const json& results = response["results"];
  ASSERT_EQ(results.size(), 7u);
  for (int i = 0; i < 7; ++i) {
    const json& r = results[i];
    EXPECT_EQ(r["rank"], i + 1);
    EXPECT_EQ(r["record_id"], oracle[i].second);
    EXPECT_NEAR(r["distance"].get<double>(), oracle[i].first, 1e-8 * (1 + oracle[i].first));
    const EmbeddingRecord& rec = db.record(oracle[i].second);
    EXPECT_EQ(r["image_id"], rec.image_id);
    EXPECT_EQ(r["labels"]["subject"], index_->vocab.names[rec.subject_class]);
    EXPECT_EQ(r["labels"]["predicate"], std::string(PredicateName(rec.predicate)));
    EXPECT_EQ(r["exact_match"], rec.subject_class == s && rec.object_class == o);
    EXPECT_NEAR(r["similarity"].get<double>(), 1.0 / r["distance"].get<double>(),
                1e-7 * r["similarity"].get<double>());
  }
}

TEST_F(ServiceTest, ModeDerivationAndExplicitMode) {
  const std::string c = CommonClass();
  const std::string pred(PredicateName(index_->db.record(0).predicate));
  EXPECT_EQ(service_->Query({{"subject", c}})["query"]["mode"], "s");
  EXPECT_EQ(service_->Query({{"object", c}})["query"]["mode"], "o");
  EXPECT_EQ(service_->Query({{"predicate", pred}})["query"]["mode"], "p");
  EXPECT_EQ(service_->Query({{"subject", c}, {"predicate", pred}, {"object", c}})["query"]["mode"],
            "s+p+o");
  // Extra fields are allowed when the mode is explicit.
  const json r = service_->Query({{"subject", c}, {"predicate", pred}, {"mode", "s"}, {"k", 3}});
  EXPECT_EQ(r["query"]["mode"], "s");
  EXPECT_EQ(r["results"].size(), 3u);
  // Default k.
  EXPECT_EQ(service_->Query({{"subject", c}})["results"].size(),
            std::min<std::size_t>(10, index_->db.size()));
}

TEST_F(ServiceTest, RequestErrors) {
  const std::string c = CommonClass();
  ExpectApiError([&] { service_->Query(json::array()); }, 400);
  ExpectApiError([&] { service_->Query({{"subject", c}, {"colour", "red"}}); }, 400, "colour");
  ExpectApiError([&] { service_->Query({{"subject", c}, {"predicate", "left of"}}); }, 400,
                 "mode");
  ExpectApiError([&] { service_->Query(json::object()); }, 400, "mode");
  ExpectApiError([&] { service_->Query({{"subject", c}, {"mode", "x+y"}}); }, 400, "mode",
                 "x+y");
  ExpectApiError([&] { service_->Query({{"subject", c}, {"mode", "s+o"}}); }, 400, "object");
  ExpectApiError([&] { service_->Query({{"subject", c}, {"k", 0}}); }, 400, "k");
  ExpectApiError([&] { service_->Query({{"subject", c}, {"k", 2.5}}); }, 400, "k");
  ExpectApiError([&] { service_->Query({{"subject", c}, {"k", "3"}}); }, 400, "k");
  ExpectApiError([&] { service_->Query({{"subject", 4}}); }, 400, "subject");
  ExpectApiError([&] { service_->Query({{"subject", "unicorn"}}); }, 422, "subject", "unicorn");
  ExpectApiError([&] { service_->Query({{"object", "unicorn"}}); }, 422, "object", "unicorn");
  ExpectApiError([&] { service_->Query({{"predicate", "near"}}); }, 422, "predicate", "near");
  ExpectApiError([&] { service_->QueryText("{\"subject\": "); }, 400);
  ExpectApiError([&] { service_->Record(index_->db.size()); }, 404, "id",
                 std::to_string(index_->db.size()));
}

TEST_F(ServiceTest, KnownClassWithoutVectorsIs422) {
  // A vocabulary class that no record uses.
  ClassVocabulary vocab = index_->vocab;
  vocab.names.push_back("ghost");
  vocab.frequencies.push_back(0);
  EmbeddingDatabase db(index_->db.d_embed(), vocab.Hash(), index_->db.records());
  const QueryService service(db, vocab);
  ExpectApiError([&] { service.Query({{"subject", "ghost"}}); }, 422, "subject", "ghost");
}

TEST_F(ServiceTest, RepeatedAndConcurrentQueriesAreIdentical) {
  const json request = {{"subject", CommonClass()}, {"k", 5}};
  const std::string first = service_->Query(request).dump();
  EXPECT_EQ(service_->QueryText(request.dump()).dump(), first);
  std::vector<std::string> out(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] { out[t] = service_->Query(request).dump(); });
  }
  for (auto& th : threads) th.join();
  for (const auto& s : out) EXPECT_EQ(s, first);
}

TEST_F(ServiceTest, RecordGeometryFollowsCorpus) {
  const auto& corpus = index_->corpus;
  std::uint64_t id = 0;
  for (std::size_t g = 0; g < corpus.size(); ++g) {
    for (const Triplet& t : corpus[g].triplets) {
      const json r = service_->Record(id);
      EXPECT_EQ(r["record_id"], id);
      EXPECT_EQ(r["image_id"], g);
      EXPECT_EQ(r["image_name"], corpus[g].image_id);
      const Box& s = corpus[g].objects[t.subject_id].box;
      const Box& o = corpus[g].objects[t.object_id].box;
      EXPECT_EQ(r["geometry"]["subject_box"][0], s.x0);
      EXPECT_EQ(r["geometry"]["object_box"][3], o.y1);
      EXPECT_EQ(r["geometry"]["superbox"][0], std::min(s.x0, o.x0));
      EXPECT_EQ(r["geometry"]["superbox"][3], std::max(s.y1, o.y1));
      EXPECT_EQ(r["labels"]["predicate"], std::string(PredicateName(t.predicate)));
      ++id;
    }
  }
  const QueryService bare(index_->db, index_->vocab);
  EXPECT_TRUE(bare.Record(0)["geometry"].is_null());
  EXPECT_FALSE(bare.Health()["has_corpus"].get<bool>());
}

TEST_F(ServiceTest, VocabAndHealth) {
  const json v = service_->Vocab();
  const int c = index_->vocab.size();
  ASSERT_EQ(v["classes"].size(), static_cast<std::size_t>(c));
  int tail = 0;
  for (int i = 0; i < c; ++i) {
    EXPECT_EQ(v["classes"][i]["name"], index_->vocab.names[i]);
    EXPECT_EQ(v["classes"][i]["frequency"], index_->vocab.frequencies[i]);
    tail += v["classes"][i]["tail"].get<bool>();
  }
  EXPECT_EQ(c - tail, (c + 4) / 5);
  ASSERT_EQ(v["predicates"].size(), 6u);
  std::int64_t total = 0;
  for (const json& p : v["predicates"]) total += p["frequency"].get<std::int64_t>();
  EXPECT_EQ(total, static_cast<std::int64_t>(index_->db.size()));

  const json h = service_->Health();
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["records"], index_->db.size());
  EXPECT_EQ(h["d_embed"], 6);
  EXPECT_TRUE(h["has_corpus"].get<bool>());
}

TEST_F(ServiceTest, ConstructionChecks) {
  ClassVocabulary other = index_->vocab;
  other.names[0] = "renamed";
  EXPECT_SGIR_ERROR(QueryService(index_->db, other), ErrorCode::kIncompatibleCheckpoint);
  auto corpus = index_->corpus;
  corpus.pop_back();
  EXPECT_SGIR_ERROR(QueryService(index_->db, index_->vocab, corpus),
                    ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace sgir
