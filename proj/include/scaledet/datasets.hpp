/* Copyright 2026 The Scaledet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scaledet/geometry.hpp"

namespace scaledet {

inline constexpr std::string_view kDontCare = "DontCare";

// One labeled object from a KITTI label file or a VOC annotation.
struct Annotation {
  std::string class_name;
  Box box;
  // KITTI: fraction in [0, 1]. VOC: 0 or 1.
  double truncated = 0.0;
  // KITTI: 0 fully visible .. 3 unknown. VOC: 0 or 1.
  int occluded = 0;
  bool difficult = false;  // VOC only
  std::string source_image;
  std::optional<int> image_w;
  std::optional<int> image_h;

  // KITTI 3D fields, carried through unchanged.
  double alpha = -10.0;
  std::array<double, 3> dimensions{-1.0, -1.0, -1.0};
  std::array<double, 3> location{-1000.0, -1000.0, -1000.0};
  double rotation_y = -10.0;
  std::optional<double> score;  // 16th column in KITTI result files

  bool is_dont_care() const { return class_name == kDontCare; }

  bool operator==(const Annotation&) const = default;
};

// All annotations of one image.
struct ImageAnnotations {
  std::string image_id;
  std::optional<int> image_w;
  std::optional<int> image_h;
  std::vector<Annotation> objects;
};

// Parses the contents of one KITTI object label file. Blank lines are
// skipped; every other line must carry at least 15 fields.
std::vector<Annotation> parse_kitti_label(std::string_view text,
                                          std::string_view image_id);

// Inverse of parse_kitti_label for a single object (no trailing newline).
std::string format_kitti_line(const Annotation& a);

struct VocAnnotation {
  int image_w = 0;
  int image_h = 0;
  std::vector<Annotation> objects;
};

// Parses a PASCAL VOC annotation XML document. The 1-based inclusive
// corners are shifted to the continuous convention: xmin/ymin lose 1,
// xmax/ymax are kept.
VocAnnotation parse_voc_xml(std::string_view text,
                            std::string_view image_id = {});

enum class AnnotationFormat { kKitti, kVoc };

struct LoadResult {
  std::vector<ImageAnnotations> images;  // sorted by image_id
  std::vector<std::string> skipped;      // "file: reason"
};

// Loads every *.txt (KITTI) or *.xml (VOC) file of `dir`. The image id is
// the file stem. With skip_bad, unparseable files are listed in `skipped`
// instead of throwing.
LoadResult load_annotation_dir(const std::filesystem::path& dir,
                               AnnotationFormat format, bool skip_bad = false);

// Binned counts. A value v lands in bin i when edges[i] <= v < edges[i+1];
// values below the first edge go to the first bin and values at or past the
// last edge go to the last bin.
class Histogram {
 public:
  Histogram(std::string name, std::vector<double> edges);

  void add(double value, std::size_t n = 1);
  void merge(const Histogram& other);

  std::size_t bin_of(double value) const;
  std::size_t total() const;
  std::size_t mode_bin() const;  // lowest index among the maximal bins

  const std::string& name() const { return name_; }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<std::size_t>& counts() const { return counts_; }

 private:
  std::string name_;
  std::vector<double> edges_;
  std::vector<std::size_t> counts_;
};

inline const std::vector<double>& default_width_edges() {
  static const std::vector<double> edges{
      0, 30, 60, 90, 120, 180, 256, 384, 512,
      std::numeric_limits<double>::infinity()};
  return edges;
}

inline const std::vector<double>& default_aspect_edges() {
  static const std::vector<double> edges{
      0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0,
      std::numeric_limits<double>::infinity()};
  return edges;
}

struct DatasetStats {
  Histogram width;
  Histogram height;
  Histogram sqrt_area;
  Histogram aspect;  // h / w
  std::map<std::string, std::size_t> class_counts;  // every input object
  std::size_t image_count = 0;              // distinct source images
  std::size_t images_with_matches = 0;      // images with >= 1 filtered object

  void merge(const DatasetStats& other);
  std::vector<const Histogram*> histograms() const;
};

struct StatsOptions {
  std::optional<std::string> class_filter;  // case-insensitive match
  std::vector<double> size_edges = default_width_edges();
  std::vector<double> aspect_edges = default_aspect_edges();
  bool include_dont_care = false;
};

// Scale and aspect histograms over the annotations passing the filter.
// Throws ConfigError for bad edges.
DatasetStats compute_stats(const std::vector<Annotation>& annotations,
                           const StatsOptions& options = {});

bool class_matches(std::string_view class_name, std::string_view filter);

// One train/test partition of a cross-validation scheme.
struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Draws `num_folds` independent random partitions of `image_ids` into a
// test set of `test_size` and a training set of `train_size` (train_size 0
// means "everything not in test"). Deterministic in `seed`.
std::vector<Fold> make_random_folds(std::vector<std::string> image_ids,
                                    std::size_t num_folds,
                                    std::size_t test_size,
                                    std::size_t train_size,
                                    std::uint64_t seed);

}  // namespace scaledet
