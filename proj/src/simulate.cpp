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
#include "scaledet/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "scaledet/error.hpp"
#include "scaledet/text.hpp"

namespace scaledet {
namespace {

constexpr std::uint64_t kFalsePositiveStream = ~0ULL;

std::mt19937_64 substream(std::uint64_t seed, std::string_view image_id,
                          std::uint64_t index) {
  const std::uint64_t h = text::fnv1a(image_id);
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(h),    static_cast<std::uint32_t>(h >> 32),
      static_cast<std::uint32_t>(index),
      static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Normal(mean, sigma) restricted to [0, 1] by rejection.
double draw_score(std::mt19937_64& rng, double mean, double sigma) {
  if (sigma == 0.0) return std::clamp(mean, 0.0, 1.0);
  std::normal_distribution<double> dist(mean, sigma);
  for (int i = 0; i < 64; ++i) {
    const double s = dist(rng);
    if (s >= 0.0 && s <= 1.0) return s;
  }
  return std::clamp(mean, 0.0, 1.0);
}

Box jitter(std::mt19937_64& rng, const Box& b, double sigma) {
  if (sigma == 0.0) return b;
  std::normal_distribution<double> noise(0.0, sigma);
  for (int i = 0; i < 16; ++i) {
    const double x1 = b.x1() + noise(rng);
    const double y1 = b.y1() + noise(rng);
    const double x2 = b.x2() + noise(rng);
    const double y2 = b.y2() + noise(rng);
    if (x2 > x1 && y2 > y1) return Box(x1, y1, x2, y2);
  }
  return b;
}

std::pair<double, double> parse_range(std::string_view value,
                                      std::string_view key) {
  const auto v = text::to_double_list(value, key);
  if (v.size() != 2) {
    throw ConfigError(std::string(key) + " needs two values \"lo,hi\"");
  }
  return {v[0], v[1]};
}

}  // namespace

DetectCurve::DetectCurve(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) throw ConfigError("detect_prob needs at least one knot");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto [w, p] = knots_[i];
    if (!std::isfinite(w) || !(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("detect_prob knots need finite widths and "
                        "probabilities in [0, 1]");
    }
    if (i > 0 && w < knots_[i - 1].first) {
      throw ConfigError("detect_prob knots must be sorted by width");
    }
  }
}

double DetectCurve::operator()(double width) const {
  const auto it = std::upper_bound(
      knots_.begin(), knots_.end(), width,
      [](double w, const std::pair<double, double>& k) { return w < k.first; });
  if (it == knots_.begin()) return knots_.front().second;
  if (it == knots_.end()) return knots_.back().second;
  const auto& [w0, p0] = *(it - 1);
  const auto& [w1, p1] = *it;
  return p0 + (p1 - p0) * (width - w0) / (w1 - w0);
}

void DetectorProfile::validate() const {
  if (!(loc_noise_sigma >= 0.0) || !(score_sigma >= 0.0)) {
    throw ConfigError("profile sigmas must be >= 0");
  }
  if (!(fp_per_image >= 0.0) || !std::isfinite(fp_per_image)) {
    throw ConfigError("fp_per_image must be >= 0");
  }
  if (!(score_mean_tp > score_mean_fp)) {
    throw ConfigError("score_mean_tp must exceed score_mean_fp");
  }
  if (!(fp_size_range.first > 0.0) ||
      fp_size_range.second < fp_size_range.first) {
    throw ConfigError("fp_size_range must be 0 < lo <= hi");
  }
  if (!(fp_aspect_range.first > 0.0) ||
      fp_aspect_range.second < fp_aspect_range.first) {
    throw ConfigError("fp_aspect_range must be 0 < lo <= hi");
  }
  if (!(default_image_w > 0.0) || !(default_image_h > 0.0)) {
    throw ConfigError("default image size must be positive");
  }
}

DetectorProfile parse_profile(std::string_view text) {
  DetectorProfile p;
  std::size_t line = 0;
  for (std::string_view raw : text::split(text, '\n')) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    raw = text::trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("expected key=value", line);
    }
    const std::string_view key = text::trim(raw.substr(0, eq));
    const std::string_view value = text::trim(raw.substr(eq + 1));
    const auto number = [&]() {
      const auto v = text::to_double(value);
      if (!v) {
        throw ParseError("'" + std::string(key) + "' is not numeric", line);
      }
      return *v;
    };
    try {
      if (key == "detect_prob") {
        std::vector<std::pair<double, double>> knots;
        for (std::string_view knot : text::split(value, ',')) {
          const auto colon = knot.find(':');
          const auto w = text::to_double(knot.substr(0, colon));
          const auto pr = colon == std::string_view::npos
                              ? std::nullopt
                              : text::to_double(knot.substr(colon + 1));
          if (!w || !pr) {
            throw ParseError("detect_prob knots must be width:prob", line);
          }
          knots.emplace_back(*w, *pr);
        }
        p.detect_prob = DetectCurve(std::move(knots));
      } else if (key == "loc_noise_sigma") {
        p.loc_noise_sigma = number();
      } else if (key == "score_mean_tp") {
        p.score_mean_tp = number();
      } else if (key == "score_mean_fp") {
        p.score_mean_fp = number();
      } else if (key == "score_sigma") {
        p.score_sigma = number();
      } else if (key == "fp_per_image") {
        p.fp_per_image = number();
      } else if (key == "fp_size_range") {
        p.fp_size_range = parse_range(value, key);
      } else if (key == "fp_aspect_range") {
        p.fp_aspect_range = parse_range(value, key);
      } else if (key == "fp_class") {
        p.fp_class = std::string(value);
      } else if (key == "seed") {
        const auto v = text::to_int(value);
        if (!v || *v < 0) throw ParseError("seed must be a non-negative integer", line);
        p.seed = static_cast<std::uint64_t>(*v);
      } else if (key == "image_size") {
        const auto x = value.find('x');
        const auto w = text::to_double(value.substr(0, x));
        const auto h = x == std::string_view::npos
                           ? std::nullopt
                           : text::to_double(value.substr(x + 1));
        if (!w || !h) throw ParseError("image_size must be WxH", line);
        p.default_image_w = *w;
        p.default_image_h = *h;
      } else {
        throw ParseError("unknown profile key '" + std::string(key) + "'", line);
      }
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line);
    }
  }
  p.validate();
  return p;
}

std::string format_profile(const DetectorProfile& p) {
  std::ostringstream out;
  out << "detect_prob=";
  for (std::size_t i = 0; i < p.detect_prob.knots().size(); ++i) {
    const auto& [w, pr] = p.detect_prob.knots()[i];
    out << (i ? "," : "") << text::fmt(w) << ':' << text::fmt(pr);
  }
  out << "\nloc_noise_sigma=" << text::fmt(p.loc_noise_sigma)
      << "\nscore_mean_tp=" << text::fmt(p.score_mean_tp)
      << "\nscore_mean_fp=" << text::fmt(p.score_mean_fp)
      << "\nscore_sigma=" << text::fmt(p.score_sigma)
      << "\nfp_per_image=" << text::fmt(p.fp_per_image)
      << "\nfp_size_range=" << text::fmt(p.fp_size_range.first) << ','
      << text::fmt(p.fp_size_range.second)
      << "\nfp_aspect_range=" << text::fmt(p.fp_aspect_range.first) << ','
      << text::fmt(p.fp_aspect_range.second) << "\nfp_class=" << p.fp_class
      << "\nseed=" << p.seed << "\nimage_size="
      << text::fmt(p.default_image_w) << 'x' << text::fmt(p.default_image_h)
      << '\n';
  return out.str();
}

std::vector<Detection> simulate(const std::vector<ImageAnnotations>& dataset,
                                const DetectorProfile& profile) {
  profile.validate();
  std::vector<const ImageAnnotations*> images;
  for (const auto& img : dataset) images.push_back(&img);
  std::stable_sort(images.begin(), images.end(),
                   [](const ImageAnnotations* a, const ImageAnnotations* b) {
                     return a->image_id < b->image_id;
                   });

  std::vector<Detection> out;
  for (const ImageAnnotations* img : images) {
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < img->objects.size(); ++i) {
      const Annotation& a = img->objects[i];
      if (a.is_dont_care()) continue;
      auto rng = substream(profile.seed, img->image_id, i);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      if (!(unit(rng) < profile.detect_prob(a.box.width()))) continue;
      const Box box = jitter(rng, a.box, profile.loc_noise_sigma);
      const double score =
          draw_score(rng, profile.score_mean_tp, profile.score_sigma);
      dets.push_back({img->image_id, a.class_name, box, score});
    }

    if (profile.fp_per_image > 0.0) {
      const double img_w = img->image_w ? *img->image_w : profile.default_image_w;
      const double img_h = img->image_h ? *img->image_h : profile.default_image_h;
      auto rng = substream(profile.seed, img->image_id, kFalsePositiveStream);
      std::poisson_distribution<int> count(profile.fp_per_image);
      const int n = count(rng);
      std::uniform_real_distribution<double> size(profile.fp_size_range.first,
                                                  profile.fp_size_range.second);
      std::uniform_real_distribution<double> aspect(
          profile.fp_aspect_range.first, profile.fp_aspect_range.second);
      for (int i = 0; i < n; ++i) {
        const double w = size(rng);
        const double h = w * aspect(rng);
        std::uniform_real_distribution<double> px(0.0, std::max(img_w - w, 0.0));
        std::uniform_real_distribution<double> py(0.0, std::max(img_h - h, 0.0));
        const double x1 = px(rng);
        const double y1 = py(rng);
        const auto box = clip_box(Box(x1, y1, x1 + w, y1 + h), img_w, img_h);
        const double score =
            draw_score(rng, profile.score_mean_fp, profile.score_sigma);
        if (box) dets.push_back({img->image_id, profile.fp_class, *box, score});
      }
    }

    for (std::size_t i : canonical_order(dets)) out.push_back(dets[i]);
  }
  return out;
}

}  // namespace scaledet
