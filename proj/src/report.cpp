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
#include "scaledet/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scaledet/error.hpp"
#include "scaledet/text.hpp"

namespace scaledet {
namespace {

using text::fmt;

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

// Fixed 2-decimal rendering for SVG coordinates.
std::string px(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

std::string svg_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string join_set(const std::set<long>& s) {
  std::string out;
  for (long v : s) {
    if (!out.empty()) out += ';';
    out += std::to_string(v);
  }
  return out;
}

}  // namespace

std::vector<Detection> read_detections_csv(std::string_view text) {
  std::vector<Detection> out;
  std::size_t line = 0;
  bool header = false;
  for (std::string_view raw : text::split(text, '\n')) {
    ++line;
    raw = text::trim(raw);
    if (raw.empty()) continue;
    if (!header) {
      if (raw != kDetectionsHeader) {
        throw ParseError("expected header '" + std::string(kDetectionsHeader) +
                             "'",
                         line);
      }
      header = true;
      continue;
    }
    const auto f = text::split(raw, ',');
    if (f.size() != 7) {
      throw ParseError("expected 7 fields, got " + std::to_string(f.size()),
                       line);
    }
    double v[5];
    for (int i = 0; i < 5; ++i) {
      const auto d = text::to_double(f[2 + i]);
      if (!d || !std::isfinite(*d)) {
        throw ParseError("field " + std::to_string(3 + i) + " is not numeric",
                         line);
      }
      v[i] = *d;
    }
    try {
      out.push_back({std::string(text::trim(f[0])),
                     std::string(text::trim(f[1])), Box(v[0], v[1], v[2], v[3]),
                     v[4]});
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line);
    }
  }
  if (!header) throw ParseError("missing detections header");
  return out;
}

std::string write_detections_csv(const std::vector<Detection>& dets) {
  std::string s(kDetectionsHeader);
  s += '\n';
  for (const Detection& d : dets) {
    s += d.image_id + ',' + d.class_name + ',' + fmt(d.box.x1()) + ',' +
         fmt(d.box.y1()) + ',' + fmt(d.box.x2()) + ',' + fmt(d.box.y2()) +
         ',' + fmt(d.score) + '\n';
  }
  return s;
}

std::map<std::string, std::string> read_fold_manifest(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line = 0;
  for (std::string_view raw : text::split(text, '\n')) {
    ++line;
    raw = text::trim(raw);
    if (raw.empty()) continue;
    if (line == 1 && raw == "image_id,fold_id") continue;
    const auto f = text::split(raw, ',');
    if (f.size() != 2 || text::trim(f[0]).empty() ||
        text::trim(f[1]).empty()) {
      throw ParseError("expected image_id,fold_id", line);
    }
    if (!out.emplace(std::string(text::trim(f[0])),
                     std::string(text::trim(f[1])))
             .second) {
      throw ParseError("image listed twice", line);
    }
  }
  return out;
}

std::string stats_csv(const DatasetStats& stats) {
  std::string s = "histogram_name,bin_lo,bin_hi,count\n";
  for (const Histogram* h : stats.histograms()) {
    for (std::size_t i = 0; i < h->counts().size(); ++i) {
      s += h->name() + ',' + fmt(h->edges()[i]) + ',' + fmt(h->edges()[i + 1]) +
           ',' + std::to_string(h->counts()[i]) + '\n';
    }
  }
  return s;
}

std::string class_counts_csv(const DatasetStats& stats) {
  std::string s = "class,count\n";
  for (const auto& [name, n] : stats.class_counts) {
    s += name + ',' + std::to_string(n) + '\n';
  }
  s += "#images," + std::to_string(stats.image_count) + '\n';
  s += "#images_with_filtered_objects," +
       std::to_string(stats.images_with_matches) + '\n';
  return s;
}

std::string histogram_svg(const Histogram& h) {
  constexpr double kW = 640, kH = 360, kLeft = 50, kBottom = 60, kTop = 30;
  const auto& counts = h.counts();
  const std::size_t peak =
      counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  const double plot_h = kH - kBottom - kTop;
  const double bar_w = (kW - kLeft - 10) / static_cast<double>(counts.size());

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
    << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"10\">\n"
    << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" "
       "font-size=\"14\">"
    << svg_escape(h.name()) << " (n=" << h.total() << ")</text>\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double bh =
        peak ? plot_h * static_cast<double>(counts[i]) / static_cast<double>(peak)
             : 0.0;
    const double x = kLeft + bar_w * static_cast<double>(i);
    const double y = kTop + plot_h - bh;
    s << "<rect x=\"" << px(x + 1) << "\" y=\"" << px(y) << "\" width=\""
      << px(bar_w - 2) << "\" height=\"" << px(bh)
      << "\" fill=\"#4477aa\"/>\n"
      << "<text x=\"" << px(x + bar_w / 2) << "\" y=\"" << px(y - 3)
      << "\" text-anchor=\"middle\">" << counts[i] << "</text>\n"
      << "<text x=\"" << px(x + bar_w / 2) << "\" y=\""
      << px(kTop + plot_h + 14) << "\" text-anchor=\"middle\">"
      << svg_escape(fmt(h.edges()[i])) << '-'
      << svg_escape(fmt(h.edges()[i + 1])) << "</text>\n";
  }
  s << "<line x1=\"" << kLeft << "\" y1=\"" << px(kTop + plot_h) << "\" x2=\""
    << kW - 10 << "\" y2=\"" << px(kTop + plot_h)
    << "\" stroke=\"black\"/>\n</svg>\n";
  return s.str();
}

std::string coverage_csv(const CoverageReport& r) {
  std::string s = "threshold,bucket_lo,bucket_hi,matched,total,recall\n";
  const auto& e = r.bucket_edges;
  for (std::size_t t = 0; t < r.thresholds.size(); ++t) {
    const auto row = [&](double lo, double hi, const RecallCount& c) {
      s += fmt(r.thresholds[t]) + ',' + fmt(lo) + ',' + fmt(hi) + ',' +
           std::to_string(c.matched) + ',' + std::to_string(c.total) + ',' +
           opt(c.recall()) + '\n';
    };
    row(e.front(), e.back(), r.overall[t]);
    for (std::size_t b = 0; b < r.by_bucket[t].size(); ++b) {
      row(e[b], e[b + 1], r.by_bucket[t][b]);
    }
  }
  return s;
}

std::string attribution_csv(const CoverageReport& r) {
  std::string s = "image_id,gt_width,gt_height,best_scale,best_ratio,best_iou\n";
  for (const GtAttribution& a : r.attributions) {
    s += a.image_id + ',' + fmt(a.gt_width) + ',' + fmt(a.gt_height) + ',' +
         opt(a.best_scale) + ',' + opt(a.best_ratio) + ',' + fmt(a.best_iou) +
         '\n';
  }
  return s;
}

std::string coverage_delta_csv(const CoverageReport& a,
                               const CoverageReport& b) {
  if (a.thresholds != b.thresholds || a.bucket_edges != b.bucket_edges) {
    throw InvalidInput("coverage reports use different thresholds or buckets");
  }
  std::string s = "threshold,bucket_lo,bucket_hi,recall_a,recall_b,delta\n";
  const auto& e = a.bucket_edges;
  for (std::size_t t = 0; t < a.thresholds.size(); ++t) {
    const auto row = [&](double lo, double hi, const RecallCount& ca,
                         const RecallCount& cb) {
      const auto ra = ca.recall();
      const auto rb = cb.recall();
      s += fmt(a.thresholds[t]) + ',' + fmt(lo) + ',' + fmt(hi) + ',' +
           opt(ra) + ',' + opt(rb) + ',' +
           (ra && rb ? fmt(*rb - *ra) : std::string("NA")) + '\n';
    };
    row(e.front(), e.back(), a.overall[t], b.overall[t]);
    for (std::size_t k = 0; k < a.by_bucket[t].size(); ++k) {
      row(e[k], e[k + 1], a.by_bucket[t][k], b.by_bucket[t][k]);
    }
  }
  return s;
}

std::string rf_csv(const NetGraph& g, const std::vector<RFInfo>& info) {
  std::string s = "layer,kind,rf,stride,rf_set,channels,out_w,out_h\n";
  for (std::size_t i = 0; i < info.size(); ++i) {
    const RFInfo& r = info[i];
    s += r.layer + ',' + std::string(to_string(g.layers()[i].kind)) + ',' +
         std::to_string(r.receptive_field) + ',' +
         std::to_string(r.cumulative_stride) + ',' + join_set(r.rf_set) + ',' +
         std::to_string(r.channels) + ',' + std::to_string(r.out_w) + ',' +
         std::to_string(r.out_h) + '\n';
  }
  return s;
}

std::string findings_text(const std::vector<Finding>& findings) {
  std::string s;
  for (const Finding& f : findings) {
    s += (f.ok ? "ok        " : "violation ") + f.node + ": " + f.message +
         " [channels=" + std::to_string(f.channels) + " rf_set={" +
         join_set(f.rf_set) + "}]\n";
  }
  if (findings.empty()) s = "no merge layers\n";
  return s;
}

std::string pr_csv(const EvalReport& r) {
  std::string s = "recall,precision\n";
  for (const PrPoint& p : r.pr_points) {
    s += fmt(p.recall) + ',' + fmt(p.precision) + '\n';
  }
  return s;
}

std::string bucket_ap_csv(const std::vector<BucketAp>& buckets) {
  std::string s = "bucket_lo,bucket_hi,total_gt,tp,fp,ap\n";
  for (const BucketAp& b : buckets) {
    s += fmt(b.lo) + ',' + fmt(b.hi) + ',' + std::to_string(b.total_gt) + ',' +
         std::to_string(b.tp) + ',' + std::to_string(b.fp) + ',' + opt(b.ap) +
         '\n';
  }
  return s;
}

std::string eval_summary_csv(const EvalReport& r) {
  std::string s =
      "class,iou_threshold,mode,images,total_gt,tp,fp,ignored,ap,"
      "no_ground_truth\n";
  s += r.class_name + ',' + fmt(r.iou_threshold) + ',' +
       std::string(to_string(r.mode)) + ',' + std::to_string(r.image_count) +
       ',' + std::to_string(r.total_gt) + ',' + std::to_string(r.tp) + ',' +
       std::to_string(r.fp) + ',' + std::to_string(r.ignored) + ',' +
       fmt(r.ap) + ',' + (r.no_ground_truth ? "1" : "0") + '\n';
  return s;
}

std::string folds_csv(const std::vector<FoldEval>& folds,
                      const FoldSummary& summary) {
  std::string s = "fold_id,images,total_gt,tp,fp,ap\n";
  for (const FoldEval& f : folds) {
    s += f.fold_id + ',' + std::to_string(f.report.image_count) + ',' +
         std::to_string(f.report.total_gt) + ',' +
         std::to_string(f.report.tp) + ',' + std::to_string(f.report.fp) +
         ',' + fmt(f.report.ap) + '\n';
  }
  s += "#mean,,,,," + fmt(summary.mean) + '\n';
  s += "#min,,,,," + fmt(summary.min) + '\n';
  s += "#max,,,,," + fmt(summary.max) + '\n';
  s += "#stddev,,,,," + fmt(summary.stddev) + '\n';
  return s;
}

std::string pr_svg(
    const std::vector<std::pair<std::string, std::vector<PrPoint>>>& curves) {
  constexpr double kSize = 400, kPad = 50;
  static const char* kColors[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                                  "#66ccee", "#aa3377"};
  const double span = kSize - 2 * kPad;
  const auto X = [&](double r) { return px(kPad + r * span); };
  const auto Y = [&](double p) { return px(kSize - kPad - p * span); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
    << "\" height=\"" << kSize
    << "\" font-family=\"sans-serif\" font-size=\"10\">\n"
    << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << span
    << "\" height=\"" << span << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 15
    << "\" text-anchor=\"middle\">recall</text>\n"
    << "<text x=\"15\" y=\"" << kSize / 2
    << "\" transform=\"rotate(-90 15 " << kSize / 2
    << ")\" text-anchor=\"middle\">precision</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kColors[c % std::size(kColors)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const PrPoint& p : curves[c].second) {
      s << X(p.recall) << ',' << Y(p.precision) << ' ';
    }
    s << "\"/>\n<text x=\"" << kPad + 5 << "\" y=\""
      << px(kPad + 14 + 12 * static_cast<double>(c)) << "\" fill=\"" << color
      << "\">" << svg_escape(curves[c].first) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace scaledet
