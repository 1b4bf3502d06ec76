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
#include "scaledet/anchors.hpp"

#include <cmath>

#include "scaledet/error.hpp"

namespace scaledet {

void AnchorConfig::validate() const {
  if (scales.empty()) throw ConfigError("anchor scales must not be empty");
  if (ratios.empty()) throw ConfigError("anchor ratios must not be empty");
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ConfigError("anchor scales must be positive and finite");
    }
  }
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ConfigError("anchor ratios must be positive and finite");
    }
  }
  if (!(stride > 0.0) || !std::isfinite(stride)) {
    throw ConfigError("anchor stride must be positive");
  }
}

std::vector<AnchorShape> anchor_shapes(const AnchorConfig& config) {
  config.validate();
  std::vector<AnchorShape> shapes;
  shapes.reserve(config.k());
  for (double s : config.scales) {
    for (double r : config.ratios) {
      const double root = std::sqrt(r);
      shapes.push_back({s, r, s / root, s * root});
    }
  }
  return shapes;
}

AnchorSet tile_anchors(const AnchorConfig& config, double image_w,
                       double image_h) {
  if (!(image_w > 0.0) || !(image_h > 0.0)) {
    throw InvalidInput("image dimensions must be positive");
  }
  const auto shapes = anchor_shapes(config);
  const auto cols = static_cast<std::size_t>(std::ceil(image_w / config.stride));
  const auto rows = static_cast<std::size_t>(std::ceil(image_h / config.stride));

  AnchorSet set;
  set.boxes.reserve(rows * cols * shapes.size());
  set.shape_index.reserve(rows * cols * shapes.size());
  for (std::size_t j = 0; j < rows; ++j) {
    const double cy = (static_cast<double>(j) + 0.5) * config.stride;
    for (std::size_t i = 0; i < cols; ++i) {
      const double cx = (static_cast<double>(i) + 0.5) * config.stride;
      for (std::size_t s = 0; s < shapes.size(); ++s) {
        const Box box = Box::FromCenter(cx, cy, shapes[s].w, shapes[s].h);
        const bool inside = box.x1() >= 0.0 && box.y1() >= 0.0 &&
                            box.x2() <= image_w && box.y2() <= image_h;
        switch (config.border) {
          case BorderPolicy::kKeep:
            set.boxes.push_back(box);
            break;
          case BorderPolicy::kDiscard:
            if (!inside) continue;
            set.boxes.push_back(box);
            break;
          case BorderPolicy::kClip: {
            // Centers lie inside the image, so the clip is never empty.
            set.boxes.push_back(*clip_box(box, image_w, image_h));
            break;
          }
        }
        set.shape_index.push_back(s);
      }
    }
  }
  return set;
}

std::vector<AnchorMatch> match_gt(const std::vector<Box>& anchors,
                                  const std::vector<Box>& gts) {
  std::vector<AnchorMatch> out(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const Box& gt = gts[g];
    AnchorMatch& best = out[g];
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      const Box& anchor = anchors[a];
      // Disjoint anchors have IoU 0 and only win as the first anchor seen.
      if (anchor.x2() <= gt.x1() || anchor.x1() >= gt.x2() ||
          anchor.y2() <= gt.y1() || anchor.y1() >= gt.y2()) {
        if (!best.anchor) best.anchor = a;
        continue;
      }
      const double v = iou(anchor, gt);
      if (!best.anchor || v > best.iou) {
        best.anchor = a;
        best.iou = v;
      }
    }
  }
  return out;
}

std::vector<AnchorMatch> match_gt(const std::vector<Box>& anchors,
                                  const std::vector<Annotation>& gts) {
  std::vector<Box> boxes;
  boxes.reserve(gts.size());
  for (const auto& a : gts) boxes.push_back(a.box);
  return match_gt(anchors, boxes);
}

CoverageReport coverage(const AnchorConfig& config,
                        const std::vector<ImageAnnotations>& dataset,
                        const CoverageOptions& options) {
  config.validate();
  for (double t : options.thresholds) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw ConfigError("IoU thresholds must lie in (0, 1]");
    }
  }
  // Validates the bucket edges.
  const Histogram buckets("coverage_buckets", options.bucket_edges);
  const auto shapes = anchor_shapes(config);

  CoverageReport report;
  report.thresholds = options.thresholds;
  report.bucket_edges = options.bucket_edges;
  report.overall.assign(options.thresholds.size(), {});
  report.by_bucket.assign(options.thresholds.size(),
                          std::vector<RecallCount>(buckets.counts().size()));

  for (const ImageAnnotations& img : dataset) {
    std::vector<Box> gts;
    for (const Annotation& a : img.objects) {
      if (a.is_dont_care()) continue;
      if (options.class_filter &&
          !class_matches(a.class_name, *options.class_filter)) {
        continue;
      }
      gts.push_back(a.box);
    }
    const double w = img.image_w ? *img.image_w : options.default_image_w;
    const double h = img.image_h ? *img.image_h : options.default_image_h;
    const AnchorSet anchors = tile_anchors(config, w, h);
    report.total_anchors += anchors.size();
    report.image_count += 1;

    const auto matches = match_gt(anchors.boxes, gts);
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const AnchorMatch& m = matches[g];
      const std::size_t bucket = buckets.bin_of(gts[g].width());
      for (std::size_t t = 0; t < options.thresholds.size(); ++t) {
        const bool hit = m.iou >= options.thresholds[t];
        report.overall[t].total += 1;
        report.overall[t].matched += hit;
        report.by_bucket[t][bucket].total += 1;
        report.by_bucket[t][bucket].matched += hit;
      }
      GtAttribution attr{.image_id = img.image_id,
                         .gt_width = gts[g].width(),
                         .gt_height = gts[g].height(),
                         .best_iou = m.iou};
      if (m.anchor && m.iou > 0.0) {
        const AnchorShape& shape = shapes[anchors.shape_index[*m.anchor]];
        attr.best_scale = shape.scale;
        attr.best_ratio = shape.ratio;
      }
      report.attributions.push_back(std::move(attr));
    }
  }
  return report;
}

}  // namespace scaledet
