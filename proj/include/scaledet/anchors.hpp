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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scaledet/datasets.hpp"
#include "scaledet/geometry.hpp"

namespace scaledet {

// How anchors that extend past the image border are treated when tiling.
enum class BorderPolicy {
  kKeep,     // keep unclipped
  kClip,     // keep, clipped to the image
  kDiscard,  // drop
};

// An anchor family. Scales are square roots of anchor area (128 means an
// area of 128^2); ratios are h/w.
struct AnchorConfig {
  std::vector<double> scales{128, 256, 512};
  std::vector<double> ratios{0.5, 1.0, 2.0};
  double stride = 16.0;
  BorderPolicy border = BorderPolicy::kKeep;

  std::size_t k() const { return scales.size() * ratios.size(); }

  // Throws ConfigError unless scales/ratios are non-empty and positive and
  // the stride is positive.
  void validate() const;
};

struct AnchorShape {
  double scale;
  double ratio;
  double w;
  double h;
};

// Scales-major, ratios-minor: w = s / sqrt(r), h = s * sqrt(r).
std::vector<AnchorShape> anchor_shapes(const AnchorConfig& config);

// Anchors tiled over an image, with the shape index (into anchor_shapes) of
// each box.
struct AnchorSet {
  std::vector<Box> boxes;
  std::vector<std::size_t> shape_index;

  std::size_t size() const { return boxes.size(); }
};

// One anchor family per stride-sized cell, centered at
// ((i + 0.5) * stride, (j + 0.5) * stride), for ceil(w/stride) x
// ceil(h/stride) cells. Order: rows, then columns, then shapes.
AnchorSet tile_anchors(const AnchorConfig& config, double image_w,
                       double image_h);

struct AnchorMatch {
  std::optional<std::size_t> anchor;  // nullopt when there are no anchors
  double iou = 0.0;
};

// Best anchor per ground-truth box; ties go to the lowest anchor index.
std::vector<AnchorMatch> match_gt(const std::vector<Box>& anchors,
                                  const std::vector<Box>& gts);
std::vector<AnchorMatch> match_gt(const std::vector<Box>& anchors,
                                  const std::vector<Annotation>& gts);

// Matched/total counter. recall() is nullopt for an empty denominator.
struct RecallCount {
  std::size_t matched = 0;
  std::size_t total = 0;

  std::optional<double> recall() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(matched) / static_cast<double>(total);
  }
};

struct GtAttribution {
  std::string image_id;
  double gt_width;
  double gt_height;
  std::optional<double> best_scale;
  std::optional<double> best_ratio;
  double best_iou;
};

struct CoverageOptions {
  std::vector<double> thresholds{0.5, 0.7};
  std::vector<double> bucket_edges = default_width_edges();
  std::optional<std::string> class_filter;  // DontCare is always skipped
  // Used for images without a known size.
  double default_image_w = 1392;
  double default_image_h = 512;
};

struct CoverageReport {
  std::vector<double> thresholds;
  std::vector<double> bucket_edges;
  std::vector<RecallCount> overall;                 // [threshold]
  std::vector<std::vector<RecallCount>> by_bucket;  // [threshold][bucket]
  std::vector<GtAttribution> attributions;
  std::size_t total_anchors = 0;
  std::size_t image_count = 0;

  double anchors_per_image() const {
    return image_count ? static_cast<double>(total_anchors) /
                             static_cast<double>(image_count)
                       : 0.0;
  }
};

// Recall of the anchor family against a dataset's ground truth: the share
// of GT boxes whose best anchor reaches each IoU threshold, overall and per
// GT-width bucket. Throws ConfigError for thresholds outside (0, 1].
CoverageReport coverage(const AnchorConfig& config,
                        const std::vector<ImageAnnotations>& dataset,
                        const CoverageOptions& options = {});

}  // namespace scaledet
