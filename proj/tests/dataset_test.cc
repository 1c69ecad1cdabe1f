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
#include <set>

#include "sgir/corpus_io.h"
#include "sgir/dataset.h"
#include "test_support.h"

namespace sgir {
namespace {

constexpr const char* kCoco = R"({
  "images": [
    {"id": 1, "width": 200, "height": 100},
    {"id": 2, "width": 50, "height": 50},
    {"id": 3, "width": 0, "height": 10},
    {"id": 4, "width": 10, "height": 10}
  ],
  "categories": [{"id": 7, "name": "dog"}, {"id": 3, "name": "cat"}],
  "annotations": [
    {"image_id": 1, "category_id": 3, "bbox": [20, 10, 100, 50]},
    {"image_id": 1, "category_id": 7, "bbox": [150, 0, 100, 200]},
    {"image_id": 1, "category_id": 99, "bbox": [0, 0, 10, 10]},
    {"image_id": 2, "category_id": 7, "bbox": [10, 10, 0, 5]},
    {"image_id": 2, "category_id": 7},
    {"image_id": 4, "category_id": 3, "bbox": [1, 2, 3, "x"]}
  ]
})";

TEST(CocoTest, ParsesNormalizesAndSkips) {
  const AnnotationSet set = ParseCocoAnnotations(kCoco);
  EXPECT_EQ(set.class_names, (std::vector<std::string>{"dog", "cat"}));
  ASSERT_EQ(set.records.size(), 1u);
  const AnnotationRecord& r = set.records[0];
  EXPECT_EQ(r.image_id, "1");
  ASSERT_EQ(r.objects.size(), 2u);
  EXPECT_EQ(r.objects[0].class_id, 1);
  EXPECT_EQ(r.objects[0].box, (Box{0.1, 0.1, 0.6, 0.6}));
  // Clamped to the image frame.
  EXPECT_EQ(r.objects[1].class_id, 0);
  EXPECT_EQ(r.objects[1].box, (Box{0.75, 0.0, 1.0, 1.0}));
}

TEST(CocoTest, MalformedDocuments) {
  EXPECT_SGIR_ERROR(ParseCocoAnnotations("{"), ErrorCode::kMalformedAnnotation);
  EXPECT_SGIR_ERROR(ParseCocoAnnotations("[]"), ErrorCode::kMalformedAnnotation);
  EXPECT_SGIR_ERROR(ParseCocoAnnotations(R"({"images": [], "categories": [{"id": 1}]})"),
                    ErrorCode::kMalformedAnnotation);
  EXPECT_SGIR_ERROR(
      ParseCocoAnnotations(
          R"({"images": [], "categories": [{"id": 1, "name": "a"}, {"id": 1, "name": "b"}]})"),
      ErrorCode::kMalformedAnnotation);
  EXPECT_TRUE(ParseCocoAnnotations(R"({"images": [], "categories": []})").records.empty());
}

TEST(SyntheticTest, DeterministicInSeed) {
  const VocabSpec spec;
  EXPECT_EQ(GenerateSyntheticCorpus(4, 30, spec), GenerateSyntheticCorpus(4, 30, spec));
  EXPECT_NE(GenerateSyntheticCorpus(4, 30, spec), GenerateSyntheticCorpus(5, 30, spec));
}

TEST(SyntheticTest, ScenesAreValidAndSized) {
  const auto records = GenerateSyntheticCorpus(1, 200, VocabSpec{});
  ASSERT_EQ(records.size(), 200u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].image_id, std::to_string(i));
    EXPECT_GE(records[i].objects.size(), 2u);
    EXPECT_LE(records[i].objects.size(), 8u);
    for (const AnnotatedObject& o : records[i].objects) {
      EXPECT_TRUE(o.box.IsValid());
      EXPECT_GE(o.class_id, 0);
      EXPECT_LT(o.class_id, 50);
    }
  }
}

TEST(SyntheticTest, ZipfProfileAndAllPredicates) {
  const auto graphs =
      BuildSceneGraphs(GenerateSyntheticCorpus(1, 400, VocabSpec{}), GraphBuildConfig{});
  const ClassVocabulary vocab = ClassFrequencies(graphs, SyntheticClassNames(VocabSpec{}));
  // Zipf with exponent 1: rank-1 class about 10x as common as rank-10.
  const auto& f = vocab.frequencies;
  EXPECT_GT(f[0], 4 * f[9]);
  std::int64_t head = 0, total = 0;
  for (int c = 0; c < 50; ++c) {
    total += f[c];
    if (c < 10) head += f[c];
  }
  EXPECT_GT(head, total / 2);
  std::set<Predicate> seen;
  for (const SceneGraph& g : graphs) {
    for (const Triplet& t : g.triplets) seen.insert(t.predicate);
  }
  EXPECT_EQ(seen.size(), 6u);
}

TEST(SyntheticTest, ClassNames) {
  const auto names = SyntheticClassNames(VocabSpec{});
  EXPECT_EQ(names.size(), 50u);
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 50u);
  VocabSpec big;
  big.num_classes = 60;
  EXPECT_EQ(SyntheticClassNames(big).size(), 60u);
  VocabSpec named;
  named.num_classes = 2;
  named.names = {"x", "y"};
  EXPECT_EQ(SyntheticClassNames(named), (std::vector<std::string>{"x", "y"}));
}

TEST(CorpusIoTest, RoundTripsExactly) {
  const auto graphs =
      BuildSceneGraphs(GenerateSyntheticCorpus(2, 25, VocabSpec{}), GraphBuildConfig{});
  const std::string text = SerializeGraphCorpus(graphs);
  EXPECT_EQ(ParseGraphCorpus(text), graphs);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'),
            static_cast<std::ptrdiff_t>(graphs.size()));

  testing::TempDir dir;
  WriteGraphCorpus(dir.File("c.jsonl"), graphs);
  EXPECT_EQ(ReadGraphCorpus(dir.File("c.jsonl")), graphs);
}

TEST(CorpusIoTest, RejectsMalformedRows) {
  EXPECT_ANY_THROW(ParseGraphCorpus("{\"image_id\": \"a\"\n"));
  EXPECT_ANY_THROW(ParseGraphCorpus(
      R"({"image_id":"a","objects":[{"class":0,"box":[0,0,1]}],"triplets":[]})"));
  EXPECT_ANY_THROW(ParseGraphCorpus(
      R"({"image_id":"a","objects":[{"class":0,"box":[0,0,0.5,0.5]}],"triplets":[[0,9,0]]})"));
  EXPECT_SGIR_ERROR(ReadGraphCorpus("/nonexistent/corpus.jsonl"), ErrorCode::kIo);
}

TEST(CorpusIoTest, VocabularyRoundTrip) {
  ClassVocabulary v;
  v.names = {"a", "b"};
  v.frequencies = {3, 0};
  testing::TempDir dir;
  WriteVocabulary(dir.File("v.json"), v);
  const ClassVocabulary back = ReadVocabulary(dir.File("v.json"));
  EXPECT_EQ(back.names, v.names);
  EXPECT_EQ(back.frequencies, v.frequencies);
  EXPECT_EQ(back.Hash(), v.Hash());
}

TEST(CorpusIoTest, WriteTextFileLeavesNoTemporary) {
  testing::TempDir dir;
  WriteTextFile(dir.File("x.txt"), "hello");
  WriteTextFile(dir.File("x.txt"), "world");
  EXPECT_EQ(ReadTextFile(dir.File("x.txt")), "world");
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    (void)entry;
    ++files;
  }
  EXPECT_EQ(files, 1);
}

}  // namespace
}  // namespace sgir
