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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scaledet/datasets.hpp"
#include "scaledet/geometry.hpp"

namespace scaledet {

struct Detection {
  std::string image_id;
  std::string class_name;
  Box box;
  double score;

  bool operator==(const Detection&) const = default;
};

// Greedy non-maximum suppression for one image and class: keep the best
// remaining detection, drop everything overlapping it by IoU > threshold.
// Candidates are visited by descending score, ties by input position.
// Returns survivors in that order.
std::vector<Detection> nms(const std::vector<Detection>& dets,
                           double iou_threshold);

// Indices into `dets` of the survivors, in the same order as nms().
std::vector<std::size_t> nms_indices(std::span<const Box> boxes,
                                     std::span<const double> scores,
                                     double iou_threshold);

enum class MatchLabel { kTruePositive, kFalsePositive, kIgnored };

struct LabeledDetection {
  std::size_t index;  // position in the input detection list
  double score;
  MatchLabel label;
  std::optional<std::size_t> gt;  // matched target, for true positives
};

// Canonical evaluation order: score descending, then x1, y1, x2, y2
// ascending, then input position. Equal-score detections therefore match
// identically no matter how the input was permuted.
std::vector<std::size_t> canonical_order(std::span<const Detection> dets);

// Greedy matching of one image's detections (one class). Each detection, in
// canonical order, becomes a TP when its best-IoU *unmatched* target reaches
// the threshold (that target is then used up). Otherwise it is ignored when
// some ignore region reaches the threshold, else it is a FP. Output is in
// canonical order.
std::vector<LabeledDetection> match_detections(
    std::span<const Detection> dets, std::span<const Box> targets,
    std::span<const Box> ignore, double iou_threshold);

// Annotation overload: DontCare annotations are ignore regions, every other
// annotation is a target.
std::vector<LabeledDetection> match_detections(
    std::span<const Detection> dets, const std::vector<Annotation>& gts,
    double iou_threshold);

enum class ApMode { kAllPoint, kElevenPoint };

std::string_view to_string(ApMode mode);
ApMode parse_ap_mode(std::string_view s);  // "all-point" | "11-point"

struct PrPoint {
  double recall;
  double precision;
};

// One point per non-ignored label, in order. Empty when total_gt is 0.
std::vector<PrPoint> pr_curve(std::span<const MatchLabel> labels,
                              std::size_t total_gt);

struct ApResult {
  double ap = 0.0;
  bool no_ground_truth = false;  // total_gt was 0; ap reported as 0
};

// Labels in score order (ignored labels are skipped). All-point integrates
// the monotone precision envelope over recall; 11-point averages the
// envelope sampled at recall 0, 0.1, ..., 1.
ApResult average_precision(std::span<const MatchLabel> labels,
                           std::size_t total_gt,
                           ApMode mode = ApMode::kAllPoint);

// 0.7 for cars, 0.5 for every other class.
double default_iou_threshold(std::string_view class_name);

struct BucketAp {
  double lo;
  double hi;
  std::optional<double> ap;  // nullopt: no ground truth in this bucket
  std::size_t total_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
};

struct EvalOptions {
  std::string class_name = "Car";
  std::optional<double> iou_threshold;  // default_iou_threshold() if unset
  ApMode mode = ApMode::kAllPoint;
  std::vector<double> bucket_edges;     // empty: no scale buckets
};

struct EvalReport {
  std::string class_name;
  double iou_threshold = 0.5;
  ApMode mode = ApMode::kAllPoint;
  std::vector<PrPoint> pr_points;
  double ap = 0.0;
  bool no_ground_truth = false;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t ignored = 0;
  std::size_t total_gt = 0;
  std::size_t image_count = 0;
  std::vector<BucketAp> buckets;
};

// Evaluates detections of options.class_name against the dataset. Class
// names compare case-insensitively. Detections on images absent from the
// dataset are false positives.
EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<ImageAnnotations>& dataset,
                    const EvalOptions& options = {});

// AP restricted to ground truth whose width lies in [edges[i], edges[i+1]).
// Ground truth outside the bucket becomes an ignore region for that bucket.
std::vector<BucketAp> scale_bucketed_ap(
    const std::vector<Detection>& dets,
    const std::vector<ImageAnnotations>& dataset,
    const std::vector<double>& bucket_edges, double iou_threshold,
    ApMode mode = ApMode::kAllPoint, std::string_view class_name = "Car");

struct FoldSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single fold
  std::size_t count = 0;
};

// Throws InvalidInput for an empty list or values outside [0, 1].
FoldSummary aggregate_folds(std::span<const double> per_fold_ap);

struct FoldEval {
  std::string fold_id;
  EvalReport report;
};

// Splits the dataset by the image -> fold manifest and evaluates each fold.
// Images missing from the manifest are left out.
std::vector<FoldEval> evaluate_folds(
    const std::vector<Detection>& dets,
    const std::vector<ImageAnnotations>& dataset,
    const std::map<std::string, std::string>& fold_of_image,
    const EvalOptions& options = {});

}  // namespace scaledet
