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

// Text serializations of every report type: CSV for machines, SVG for
// people. All writers are pure functions of their inputs, so identical
// inputs give byte-identical files.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scaledet/anchors.hpp"
#include "scaledet/datasets.hpp"
#include "scaledet/evaluation.hpp"
#include "scaledet/netgraph.hpp"

namespace scaledet {

inline constexpr std::string_view kDetectionsHeader =
    "image_id,class,x1,y1,x2,y2,score";

std::vector<Detection> read_detections_csv(std::string_view text);
std::string write_detections_csv(const std::vector<Detection>& dets);

// "image_id,fold_id" rows -> image -> fold.
std::map<std::string, std::string> read_fold_manifest(std::string_view text);

// histogram_name,bin_lo,bin_hi,count
std::string stats_csv(const DatasetStats& stats);
std::string class_counts_csv(const DatasetStats& stats);
std::string histogram_svg(const Histogram& h);

// threshold,bucket_lo,bucket_hi,matched,total,recall. The overall row uses
// the outermost edges; empty denominators print recall "NA".
std::string coverage_csv(const CoverageReport& r);
// image_id,gt_width,gt_height,best_scale,best_ratio,best_iou
std::string attribution_csv(const CoverageReport& r);
// threshold,bucket_lo,bucket_hi,recall_a,recall_b,delta
std::string coverage_delta_csv(const CoverageReport& a,
                               const CoverageReport& b);

// layer,kind,rf,stride,rf_set,channels,out_w,out_h
std::string rf_csv(const NetGraph& g, const std::vector<RFInfo>& info);
std::string findings_text(const std::vector<Finding>& findings);

// recall,precision
std::string pr_csv(const EvalReport& r);
// bucket_lo,bucket_hi,total_gt,tp,fp,ap
std::string bucket_ap_csv(const std::vector<BucketAp>& buckets);
std::string eval_summary_csv(const EvalReport& r);
// fold_id,images,total_gt,tp,fp,ap then mean/min/max/stddev rows
std::string folds_csv(const std::vector<FoldEval>& folds,
                      const FoldSummary& summary);
std::string pr_svg(
    const std::vector<std::pair<std::string, std::vector<PrPoint>>>& curves);

}  // namespace scaledet
