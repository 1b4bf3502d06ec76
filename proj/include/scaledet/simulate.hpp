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

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scaledet/datasets.hpp"
#include "scaledet/evaluation.hpp"

namespace scaledet {

// Piecewise-linear map from object width (pixels) to a probability. Knots
// are sorted by width; two knots at the same width form a step, with the
// later knot's value holding at that width. Constant past the end knots.
class DetectCurve {
 public:
  DetectCurve() = default;
  explicit DetectCurve(std::vector<std::pair<double, double>> knots);

  static DetectCurve Constant(double p) { return DetectCurve({{0.0, p}}); }
  // 0 below `width`, 1 from `width` on.
  static DetectCurve Step(double width) {
    return DetectCurve({{width, 0.0}, {width, 1.0}});
  }

  double operator()(double width) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_{{0.0, 1.0}};
};

// Stand-in for a trained detector: how likely each object is found as a
// function of its width, how noisy the boxes are, and how scores and false
// positives are distributed.
struct DetectorProfile {
  DetectCurve detect_prob;
  double loc_noise_sigma = 0.0;  // per-coordinate Gaussian jitter, pixels
  double score_mean_tp = 0.9;
  double score_mean_fp = 0.3;
  double score_sigma = 0.05;
  double fp_per_image = 0.0;  // Poisson mean
  std::pair<double, double> fp_size_range{20.0, 200.0};  // width, pixels
  std::pair<double, double> fp_aspect_range{0.5, 1.5};   // h / w
  std::string fp_class = "Car";
  std::uint64_t seed = 0;
  double default_image_w = 1392;
  double default_image_h = 512;

  void validate() const;  // throws ConfigError
};

// key=value lines, '#' comments. detect_prob is a list of width:prob knots,
// e.g. "detect_prob=0:0,128:0,128:1"; ranges are "lo,hi".
DetectorProfile parse_profile(std::string_view text);
std::string format_profile(const DetectorProfile& profile);

// Synthetic detections for every non-DontCare object, plus Poisson false
// positives per image. Each object and each image's false-positive draw
// use their own random stream derived from (seed, image_id, object index),
// so the result does not depend on processing order, and raising
// detect_prob can only add detections. Sorted by image_id, then canonical
// detection order.
std::vector<Detection> simulate(const std::vector<ImageAnnotations>& dataset,
                                const DetectorProfile& profile);

}  // namespace scaledet
