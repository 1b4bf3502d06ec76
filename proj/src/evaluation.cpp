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
#include "scaledet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "scaledet/error.hpp"
#include "scaledet/text.hpp"

namespace scaledet {
namespace {

struct ScoredLabel {
  double score;
  const std::string* image_id;
  const Box* box;
  MatchLabel label;
};

bool canonical_less(const Detection& a, std::size_t ia, const Detection& b,
                    std::size_t ib) {
  if (a.score != b.score) return a.score > b.score;
  return std::forward_as_tuple(a.box.x1(), a.box.y1(), a.box.x2(), a.box.y2(),
                               ia) <
         std::forward_as_tuple(b.box.x1(), b.box.y1(), b.box.x2(), b.box.y2(),
                               ib);
}

struct Partition {
  std::vector<Box> targets;
  std::vector<Box> ignore;
};

struct WidthRange {
  double lo;
  double hi;
  bool contains(double w) const { return w >= lo && w < hi; }
};

// Targets are objects of the class (inside `range`, when given); DontCare,
// VOC-difficult and out-of-range objects of the class become ignore regions.
Partition partition_gt(const std::vector<Annotation>& objects,
                       std::string_view class_name,
                       std::optional<WidthRange> range) {
  Partition p;
  for (const Annotation& a : objects) {
    if (a.is_dont_care()) {
      p.ignore.push_back(a.box);
      continue;
    }
    if (!class_matches(a.class_name, class_name)) continue;
    if (a.difficult || (range && !range->contains(a.box.width()))) {
      p.ignore.push_back(a.box);
    } else {
      p.targets.push_back(a.box);
    }
  }
  return p;
}

struct Labeled {
  std::vector<ScoredLabel> labels;  // global canonical order
  std::size_t total_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t ignored = 0;
};

Labeled label_dataset(const std::vector<Detection>& dets,
                      const std::vector<ImageAnnotations>& dataset,
                      std::string_view class_name, double iou_threshold,
                      std::optional<WidthRange> range) {
  std::map<std::string_view, std::vector<Detection>> by_image;
  for (const Detection& d : dets) {
    if (class_matches(d.class_name, class_name)) by_image[d.image_id].push_back(d);
  }
  static const std::vector<Annotation> kNone;
  std::map<std::string_view, const std::vector<Annotation>*> gt_of;
  for (const ImageAnnotations& img : dataset) gt_of[img.image_id] = &img.objects;

  Labeled out;
  const auto run = [&](std::string_view image, const std::vector<Annotation>& gts) {
    const Partition p = partition_gt(gts, class_name, range);
    out.total_gt += p.targets.size();
    const auto it = by_image.find(image);
    if (it == by_image.end()) return;
    const std::vector<Detection>& img_dets = it->second;
    for (const LabeledDetection& l :
         match_detections(img_dets, p.targets, p.ignore, iou_threshold)) {
      const Detection& d = img_dets[l.index];
      out.labels.push_back({d.score, &d.image_id, &d.box, l.label});
      switch (l.label) {
        case MatchLabel::kTruePositive: ++out.tp; break;
        case MatchLabel::kFalsePositive: ++out.fp; break;
        case MatchLabel::kIgnored: ++out.ignored; break;
      }
    }
  };
  for (const auto& [image, gts] : gt_of) run(image, *gts);
  for (const auto& [image, _] : by_image) {
    if (!gt_of.contains(image)) run(image, kNone);
  }

  std::sort(out.labels.begin(), out.labels.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) {
              if (a.score != b.score) return a.score > b.score;
              return std::forward_as_tuple(*a.image_id, a.box->x1(),
                                           a.box->y1(), a.box->x2(),
                                           a.box->y2()) <
                     std::forward_as_tuple(*b.image_id, b.box->x1(),
                                           b.box->y1(), b.box->x2(),
                                           b.box->y2());
            });
  return out;
}

std::vector<MatchLabel> just_labels(const Labeled& l) {
  std::vector<MatchLabel> out;
  out.reserve(l.labels.size());
  for (const auto& s : l.labels) out.push_back(s.label);
  return out;
}

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw InvalidInput("IoU threshold must lie in (0, 1]");
  }
}

}  // namespace

std::vector<std::size_t> nms_indices(std::span<const Box> boxes,
                                     std::span<const double> scores,
                                     double iou_threshold) {
  if (boxes.size() != scores.size()) {
    throw InvalidInput("nms: boxes and scores differ in length");
  }
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<bool> suppressed(boxes.size(), false);
  std::vector<std::size_t> keep;
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (suppressed[i]) continue;
    keep.push_back(i);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (!suppressed[j] && iou(boxes[i], boxes[j]) > iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return keep;
}

std::vector<Detection> nms(const std::vector<Detection>& dets,
                           double iou_threshold) {
  std::vector<Box> boxes;
  std::vector<double> scores;
  boxes.reserve(dets.size());
  scores.reserve(dets.size());
  for (const auto& d : dets) {
    boxes.push_back(d.box);
    scores.push_back(d.score);
  }
  std::vector<Detection> out;
  for (std::size_t i : nms_indices(boxes, scores, iou_threshold)) {
    out.push_back(dets[i]);
  }
  return out;
}

std::vector<std::size_t> canonical_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return canonical_less(dets[a], a, dets[b], b);
  });
  return order;
}

std::vector<LabeledDetection> match_detections(
    std::span<const Detection> dets, std::span<const Box> targets,
    std::span<const Box> ignore, double iou_threshold) {
  std::vector<bool> used(targets.size(), false);
  std::vector<LabeledDetection> out;
  out.reserve(dets.size());
  for (std::size_t i : canonical_order(dets)) {
    const Detection& d = dets[i];
    double best = -1.0;
    std::optional<std::size_t> best_gt;
    for (std::size_t g = 0; g < targets.size(); ++g) {
      if (used[g]) continue;
      const double v = iou(d.box, targets[g]);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    LabeledDetection l{i, d.score, MatchLabel::kFalsePositive, std::nullopt};
    if (best_gt && best >= iou_threshold) {
      used[*best_gt] = true;
      l.label = MatchLabel::kTruePositive;
      l.gt = best_gt;
    } else {
      for (const Box& region : ignore) {
        if (iou(d.box, region) >= iou_threshold) {
          l.label = MatchLabel::kIgnored;
          break;
        }
      }
    }
    out.push_back(l);
  }
  return out;
}

std::vector<LabeledDetection> match_detections(
    std::span<const Detection> dets, const std::vector<Annotation>& gts,
    double iou_threshold) {
  std::vector<Box> targets;
  std::vector<Box> ignore;
  for (const Annotation& a : gts) {
    (a.is_dont_care() ? ignore : targets).push_back(a.box);
  }
  return match_detections(dets, targets, ignore, iou_threshold);
}

std::string_view to_string(ApMode mode) {
  return mode == ApMode::kAllPoint ? "all-point" : "11-point";
}

ApMode parse_ap_mode(std::string_view s) {
  if (s == "all-point" || s == "all") return ApMode::kAllPoint;
  if (s == "11-point" || s == "11") return ApMode::kElevenPoint;
  throw ConfigError("unknown AP mode '" + std::string(s) +
                    "' (expected all-point or 11-point)");
}

std::vector<PrPoint> pr_curve(std::span<const MatchLabel> labels,
                              std::size_t total_gt) {
  std::vector<PrPoint> out;
  if (total_gt == 0) return out;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (MatchLabel l : labels) {
    if (l == MatchLabel::kIgnored) continue;
    (l == MatchLabel::kTruePositive ? tp : fp) += 1;
    out.push_back({static_cast<double>(tp) / static_cast<double>(total_gt),
                   static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  return out;
}

ApResult average_precision(std::span<const MatchLabel> labels,
                           std::size_t total_gt, ApMode mode) {
  if (total_gt == 0) return {0.0, true};
  const std::vector<PrPoint> pr = pr_curve(labels, total_gt);

  if (mode == ApMode::kElevenPoint) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double t = i / 10.0;
      double p = 0.0;
      for (const PrPoint& pt : pr) {
        if (pt.recall >= t) p = std::max(p, pt.precision);
      }
      sum += p;
    }
    return {sum / 11.0, false};
  }

  std::vector<double> rec{0.0};
  std::vector<double> prec{0.0};
  for (const PrPoint& pt : pr) {
    rec.push_back(pt.recall);
    prec.push_back(pt.precision);
  }
  rec.push_back(1.0);
  prec.push_back(0.0);
  for (std::size_t i = prec.size() - 1; i-- > 0;) {
    prec[i] = std::max(prec[i], prec[i + 1]);
  }
  double ap = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    ap += (rec[i] - rec[i - 1]) * prec[i];
  }
  return {std::clamp(ap, 0.0, 1.0), false};
}

double default_iou_threshold(std::string_view class_name) {
  return text::iequals(class_name, "car") ? 0.7 : 0.5;
}

EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<ImageAnnotations>& dataset,
                    const EvalOptions& options) {
  EvalReport r;
  r.class_name = options.class_name;
  r.iou_threshold = options.iou_threshold.value_or(
      default_iou_threshold(options.class_name));
  check_threshold(r.iou_threshold);
  r.mode = options.mode;
  r.image_count = dataset.size();

  const Labeled l =
      label_dataset(dets, dataset, r.class_name, r.iou_threshold, std::nullopt);
  const auto labels = just_labels(l);
  r.pr_points = pr_curve(labels, l.total_gt);
  const ApResult ap = average_precision(labels, l.total_gt, r.mode);
  r.ap = ap.ap;
  r.no_ground_truth = ap.no_ground_truth;
  r.tp = l.tp;
  r.fp = l.fp;
  r.ignored = l.ignored;
  r.total_gt = l.total_gt;
  if (!options.bucket_edges.empty()) {
    r.buckets = scale_bucketed_ap(dets, dataset, options.bucket_edges,
                                  r.iou_threshold, r.mode, r.class_name);
  }
  return r;
}

std::vector<BucketAp> scale_bucketed_ap(
    const std::vector<Detection>& dets,
    const std::vector<ImageAnnotations>& dataset,
    const std::vector<double>& bucket_edges, double iou_threshold, ApMode mode,
    std::string_view class_name) {
  check_threshold(iou_threshold);
  if (bucket_edges.size() < 2) {
    throw ConfigError("scale buckets need at least 2 edges");
  }
  for (std::size_t i = 1; i < bucket_edges.size(); ++i) {
    if (!(bucket_edges[i] > bucket_edges[i - 1])) {
      throw ConfigError("scale bucket edges must be strictly increasing");
    }
  }
  std::vector<BucketAp> out;
  for (std::size_t b = 0; b + 1 < bucket_edges.size(); ++b) {
    const WidthRange range{bucket_edges[b], bucket_edges[b + 1]};
    const Labeled l =
        label_dataset(dets, dataset, class_name, iou_threshold, range);
    BucketAp bucket{range.lo, range.hi, std::nullopt, l.total_gt, l.tp, l.fp};
    if (l.total_gt > 0) {
      bucket.ap = average_precision(just_labels(l), l.total_gt, mode).ap;
    }
    out.push_back(bucket);
  }
  return out;
}

FoldSummary aggregate_folds(std::span<const double> per_fold_ap) {
  if (per_fold_ap.empty()) throw InvalidInput("no fold results to aggregate");
  for (double v : per_fold_ap) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidInput("fold AP outside [0, 1]");
    }
  }
  FoldSummary s;
  s.count = per_fold_ap.size();
  s.mean = std::accumulate(per_fold_ap.begin(), per_fold_ap.end(), 0.0) /
           static_cast<double>(s.count);
  const auto [lo, hi] =
      std::minmax_element(per_fold_ap.begin(), per_fold_ap.end());
  s.min = *lo;
  s.max = *hi;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : per_fold_ap) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

std::vector<FoldEval> evaluate_folds(
    const std::vector<Detection>& dets,
    const std::vector<ImageAnnotations>& dataset,
    const std::map<std::string, std::string>& fold_of_image,
    const EvalOptions& options) {
  std::map<std::string, std::vector<ImageAnnotations>> images;
  std::map<std::string, std::vector<Detection>> fold_dets;
  for (const ImageAnnotations& img : dataset) {
    const auto it = fold_of_image.find(img.image_id);
    if (it != fold_of_image.end()) images[it->second].push_back(img);
  }
  for (const Detection& d : dets) {
    const auto it = fold_of_image.find(d.image_id);
    if (it != fold_of_image.end()) fold_dets[it->second].push_back(d);
  }
  std::set<std::string> fold_ids;
  for (const auto& [_, f] : fold_of_image) fold_ids.insert(f);

  std::vector<FoldEval> out;
  for (const std::string& id : fold_ids) {
    out.push_back({id, evaluate(fold_dets[id], images[id], options)});
  }
  return out;
}

}  // namespace scaledet
