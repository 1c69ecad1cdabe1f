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

#include "sgir/dataset.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sgir/corpus_io.h"
#include "sgir/error.h"
#include "sgir/random.h"

namespace sgir {
namespace {

using nlohmann::json;

std::string IdToString(const json& id) {
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<std::int64_t>());
  if (id.is_number_unsigned()) return std::to_string(id.get<std::uint64_t>());
  throw Error(ErrorCode::kMalformedAnnotation, "id is not a string or integer");
}

struct ImageInfo {
  std::string id;
  double width = 0.0;
  double height = 0.0;
};

}  // namespace

AnnotationSet ParseCocoAnnotations(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedAnnotation,
                fmt::format("unparseable annotation JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("images") ||
      !doc["images"].is_array() || !doc.contains("categories") ||
      !doc["categories"].is_array()) {
    throw Error(ErrorCode::kMalformedAnnotation,
                "expected an object with 'images' and 'categories' arrays");
  }

  AnnotationSet out;
  std::unordered_map<std::string, int> category_index;
  for (const json& cat : doc["categories"]) {
    if (!cat.is_object() || !cat.contains("id") || !cat.contains("name") ||
        !cat["name"].is_string()) {
      throw Error(ErrorCode::kMalformedAnnotation, "category without id/name");
    }
    const std::string key = IdToString(cat["id"]);
    if (category_index.count(key) != 0) {
      throw Error(ErrorCode::kMalformedAnnotation,
                  fmt::format("duplicate category id {}", key));
    }
    category_index[key] = static_cast<int>(out.class_names.size());
    out.class_names.push_back(cat["name"].get<std::string>());
  }

  std::vector<ImageInfo> images;
  std::unordered_map<std::string, std::size_t> image_index;
  for (const json& img : doc["images"]) {
    if (!img.is_object() || !img.contains("id") || !img.contains("width") ||
        !img.contains("height") || !img["width"].is_number() ||
        !img["height"].is_number()) {
      spdlog::warn("skipping image entry without id/width/height");
      continue;
    }
    ImageInfo info{IdToString(img["id"]), img["width"].get<double>(),
                   img["height"].get<double>()};
    if (!(info.width > 0.0) || !(info.height > 0.0)) {
      spdlog::warn("skipping image {} with non-positive size", info.id);
      continue;
    }
    image_index[info.id] = images.size();
    images.push_back(std::move(info));
  }

  std::vector<std::vector<AnnotatedObject>> per_image(images.size());
  const json empty = json::array();
  const json& annotations =
      doc.contains("annotations") ? doc["annotations"] : empty;
  if (!annotations.is_array()) {
    throw Error(ErrorCode::kMalformedAnnotation, "'annotations' is not a list");
  }
  std::size_t skipped = 0;
  for (const json& ann : annotations) {
    if (!ann.is_object() || !ann.contains("image_id") ||
        !ann.contains("category_id") || !ann.contains("bbox") ||
        !ann["bbox"].is_array() || ann["bbox"].size() != 4) {
      ++skipped;
      spdlog::warn("skipping annotation with missing fields");
      continue;
    }
    const auto img_it = image_index.find(IdToString(ann["image_id"]));
    const auto cat_it = category_index.find(IdToString(ann["category_id"]));
    if (img_it == image_index.end() || cat_it == category_index.end()) {
      ++skipped;
      spdlog::warn("skipping annotation with unknown image or category");
      continue;
    }
    const ImageInfo& img = images[img_it->second];
    std::array<double, 4> b{};
    bool numeric = true;
    for (int i = 0; i < 4; ++i) {
      if (!ann["bbox"][i].is_number()) {
        numeric = false;
        break;
      }
      b[i] = ann["bbox"][i].get<double>();
    }
    if (!numeric) {
      ++skipped;
      spdlog::warn("skipping annotation with non-numeric bbox");
      continue;
    }
    Box box{std::clamp(b[0] / img.width, 0.0, 1.0),
            std::clamp(b[1] / img.height, 0.0, 1.0),
            std::clamp((b[0] + b[2]) / img.width, 0.0, 1.0),
            std::clamp((b[1] + b[3]) / img.height, 0.0, 1.0)};
    if (!box.IsValid()) {
      ++skipped;
      spdlog::warn("skipping zero-area annotation in image {}", img.id);
      continue;
    }
    per_image[img_it->second].push_back(AnnotatedObject{cat_it->second, box});
  }
  if (skipped > 0) spdlog::info("skipped {} annotations", skipped);

  for (std::size_t i = 0; i < images.size(); ++i) {
    if (per_image[i].empty()) continue;
    out.records.push_back(AnnotationRecord{images[i].id, std::move(per_image[i])});
  }
  return out;
}

AnnotationSet LoadCocoAnnotations(const std::filesystem::path& path) {
  return ParseCocoAnnotations(ReadTextFile(path));
}

namespace {

// COCO-Stuff categories roughly in descending instance frequency.
constexpr std::array<std::string_view, 50> kDefaultNames = {
    "person",     "tree",      "sky",        "grass",    "wall",
    "building",   "car",       "table",      "chair",    "road",
    "floor",      "cup",       "bottle",     "dog",      "cat",
    "window",     "pavement",  "bus",        "truck",    "clouds",
    "fence",      "bench",     "bird",       "horse",    "bicycle",
    "motorcycle", "sea",       "sand",       "snow",     "mountain",
    "train",      "boat",      "umbrella",   "kite",     "elephant",
    "giraffe",    "zebra",     "surfboard",  "skateboard", "skis",
    "laptop",     "bed",       "sheep",      "cow",      "pizza",
    "clock",      "vase",      "airplane",   "bear",     "toaster"};

struct ClassPrior {
  double cx;
  double cy;
  double w;
  double h;
};

ClassPrior PriorFor(int class_id) {
  Rng rng(Fnv1a64(fmt::format("class-prior-{}", class_id)));
  ClassPrior prior{};
  prior.cx = rng.Uniform(0.15, 0.85);
  prior.cy = rng.Uniform(0.15, 0.85);
  prior.w = rng.Uniform(0.12, 0.45);
  prior.h = rng.Uniform(0.12, 0.45);
  return prior;
}

constexpr int kMinObjects = 2;
constexpr int kMaxObjects = 8;
constexpr double kNestProbability = 0.25;
constexpr double kMinSide = 0.08;
constexpr double kNestParentSide = 0.2;

Box SamplePlacedBox(const ClassPrior& prior, Rng& rng) {
  const double w = std::clamp(prior.w * rng.Uniform(0.7, 1.3), kMinSide, 0.6);
  const double h = std::clamp(prior.h * rng.Uniform(0.7, 1.3), kMinSide, 0.6);
  const double cx = std::clamp(prior.cx + 0.12 * rng.Normal(), w / 2, 1 - w / 2);
  const double cy = std::clamp(prior.cy + 0.12 * rng.Normal(), h / 2, 1 - h / 2);
  return Box{std::max(0.0, cx - w / 2), std::max(0.0, cy - h / 2),
             std::min(1.0, cx + w / 2), std::min(1.0, cy + h / 2)};
}

Box SampleNestedBox(const Box& parent, Rng& rng) {
  const double w = parent.Width() * rng.Uniform(0.3, 0.7);
  const double h = parent.Height() * rng.Uniform(0.3, 0.7);
  const double x0 = parent.x0 + (parent.Width() - w) * rng.Uniform(0.1, 0.9);
  const double y0 = parent.y0 + (parent.Height() - h) * rng.Uniform(0.1, 0.9);
  return Box{x0, y0, x0 + w, y0 + h};
}

}  // namespace

std::vector<std::string> SyntheticClassNames(const VocabSpec& spec) {
  std::vector<std::string> names;
  names.reserve(spec.num_classes);
  for (int i = 0; i < spec.num_classes; ++i) {
    if (i < static_cast<int>(spec.names.size())) {
      names.push_back(spec.names[i]);
    } else if (spec.names.empty() && i < static_cast<int>(kDefaultNames.size())) {
      names.emplace_back(kDefaultNames[i]);
    } else {
      names.push_back(fmt::format("class_{}", i));
    }
  }
  return names;
}

std::vector<AnnotationRecord> GenerateSyntheticCorpus(std::uint64_t seed,
                                                      int n_scenes,
                                                      const VocabSpec& spec) {
  if (spec.num_classes < 1 || n_scenes < 0 || !(spec.zipf_exponent >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad synthetic corpus spec");
  }
  std::vector<double> cumulative(spec.num_classes);
  double total = 0.0;
  for (int r = 0; r < spec.num_classes; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
    cumulative[r] = total;
  }
  std::vector<ClassPrior> priors;
  priors.reserve(spec.num_classes);
  for (int c = 0; c < spec.num_classes; ++c) priors.push_back(PriorFor(c));

  Rng rng(seed);
  std::vector<AnnotationRecord> records;
  records.reserve(n_scenes);
  for (int s = 0; s < n_scenes; ++s) {
    AnnotationRecord record;
    record.image_id = std::to_string(s);
    const int n_objects =
        kMinObjects +
        static_cast<int>(rng.UniformInt(kMaxObjects - kMinObjects + 1));
    for (int k = 0; k < n_objects; ++k) {
      const double u = rng.Uniform() * total;
      const int cls = static_cast<int>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) -
          cumulative.begin());
      const int class_id = std::min(cls, spec.num_classes - 1);

      std::vector<int> parents;
      for (int j = 0; j < static_cast<int>(record.objects.size()); ++j) {
        const Box& b = record.objects[j].box;
        if (b.Width() >= kNestParentSide && b.Height() >= kNestParentSide) {
          parents.push_back(j);
        }
      }
      Box box;
      if (!parents.empty() && rng.Uniform() < kNestProbability) {
        const int parent = parents[rng.UniformInt(parents.size())];
        box = SampleNestedBox(record.objects[parent].box, rng);
      } else {
        box = SamplePlacedBox(priors[class_id], rng);
      }
      record.objects.push_back(AnnotatedObject{class_id, box});
    }
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace sgir
