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
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "scaledet/error.hpp"
#include "scaledet/evaluation.hpp"

using namespace scaledet;

namespace {

constexpr auto TP = MatchLabel::kTruePositive;
constexpr auto FP = MatchLabel::kFalsePositive;
constexpr auto IG = MatchLabel::kIgnored;

Detection det(double x1, double y1, double x2, double y2, double score,
              std::string image = "img") {
  return {std::move(image), "Car", Box(x1, y1, x2, y2), score};
}

Annotation gt(double x1, double y1, double x2, double y2,
              std::string cls = "Car") {
  return Annotation{.class_name = std::move(cls), .box = Box(x1, y1, x2, y2)};
}

std::vector<MatchLabel> random_labels(std::mt19937_64& rng, std::size_t n) {
  std::bernoulli_distribution coin(0.5);
  std::vector<MatchLabel> out(n);
  for (auto& l : out) l = coin(rng) ? TP : FP;
  return out;
}

}  // namespace

TEST_CASE("nms examples") {
  CHECK(nms({det(0, 0, 10, 10, 0.5)}, 0.5).size() == 1);
  const auto kept = nms({det(0, 0, 10, 10, 0.8), det(0, 0, 10, 10, 0.9)}, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);
  // IoU exactly at the threshold survives (suppression needs IoU > t).
  const auto both = nms({det(0, 0, 10, 10, 0.9), det(5, 0, 15, 10, 0.8)}, 1.0 / 3.0);
  CHECK(both.size() == 2);
  // Equal scores: input order decides.
  const auto tie = nms({det(1, 0, 11, 10, 0.7), det(0, 0, 10, 10, 0.7)}, 0.5);
  REQUIRE(tie.size() == 1);
  CHECK(tie[0].box.x1() == 1);
}

TEST_CASE("nms equals the brute-force oracle and leaves no overlapping pair") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(0, 100);
  std::uniform_real_distribution<double> size(5, 60);
  std::uniform_int_distribution<int> n(1, 50);
  std::uniform_int_distribution<int> coarse(0, 9);
  for (int inst = 0; inst < 300; ++inst) {
    std::vector<Box> boxes;
    std::vector<double> scores;
    const int count = n(rng);
    for (int i = 0; i < count; ++i) {
      const double x = pos(rng), y = pos(rng);
      boxes.emplace_back(x, y, x + size(rng), y + size(rng));
      scores.push_back(coarse(rng) / 10.0);  // plenty of ties
    }
    const double t = 0.3 + 0.05 * (inst % 8);
    const auto keep = nms_indices(boxes, scores, t);
    CHECK(keep == oracle::brute_nms(boxes, scores, t));
    for (std::size_t a = 0; a < keep.size(); ++a) {
      for (std::size_t b = a + 1; b < keep.size(); ++b) {
        CHECK(iou(boxes[keep[a]], boxes[keep[b]]) <= t);
      }
    }
  }
}

TEST_CASE("match_detections examples") {
  const std::vector<Annotation> one{gt(0, 0, 10, 10)};
  const std::vector<Detection> d1{det(0, 0, 10, 10, 0.9)};
  auto l = match_detections(d1, one, 0.5);
  REQUIRE(l.size() == 1);
  CHECK(l[0].label == TP);

  const std::vector<Detection> d2{det(0, 0, 10, 10, 0.8), det(0, 0, 10, 10, 0.9)};
  l = match_detections(d2, one, 0.5);
  REQUIRE(l.size() == 2);
  CHECK(l[0].index == 1);
  CHECK(l[0].label == TP);
  CHECK(l[1].label == FP);

  const std::vector<Annotation> dc{gt(0, 0, 10, 10, std::string(kDontCare))};
  l = match_detections(d1, dc, 0.5);
  CHECK(l[0].label == IG);
}

TEST_CASE("match_detections equals the step-by-step oracle") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(0, 80);
  std::uniform_real_distribution<double> size(10, 40);
  std::uniform_int_distribution<int> score(0, 12);
  for (int inst = 0; inst < 300; ++inst) {
    std::vector<Box> targets, ignore;
    for (int g = 0; g < 10; ++g) {
      const double x = pos(rng), y = pos(rng);
      (g < 8 ? targets : ignore).emplace_back(x, y, x + size(rng), y + size(rng));
    }
    std::vector<Detection> dets;
    for (int i = 0; i < 20; ++i) {
      // Half the detections sit near a target so TPs and duplicates occur.
      Box b = targets[i % targets.size()];
      if (i % 2) {
        const double x = pos(rng), y = pos(rng);
        b = Box(x, y, x + size(rng), y + size(rng));
      } else {
        b = Box(b.x1() + pos(rng) / 40, b.y1(), b.x2(), b.y2() + pos(rng) / 40);
      }
      dets.push_back({"img", "Car", b, score(rng) / 12.0});
    }
    const double t = inst % 2 ? 0.5 : 0.7;
    const auto expected = oracle::step_match(dets, targets, ignore, t);
    const auto got = match_detections(dets, targets, ignore, t);
    REQUIRE(got.size() == dets.size());
    for (const auto& l : got) CHECK(l.label == expected[l.index]);
  }
}

TEST_CASE("average precision fixtures") {
  for (ApMode m : {ApMode::kAllPoint, ApMode::kElevenPoint}) {
    CHECK(average_precision(std::vector{TP}, 1, m).ap == 1.0);
    CHECK(average_precision(std::vector{FP}, 1, m).ap == 0.0);
  }
  const auto none = average_precision(std::vector{FP}, 0);
  CHECK(none.no_ground_truth);
  CHECK(none.ap == 0.0);

  // Hand-computed: PR points (0.5, 1), (0.5, 1/2), (1, 2/3).
  const std::vector tft{TP, FP, TP};
  CHECK(average_precision(tft, 2).ap == doctest::Approx(0.5 + 0.5 * 2.0 / 3.0));
  CHECK(average_precision(tft, 2, ApMode::kElevenPoint).ap ==
        doctest::Approx(28.0 / 33.0).epsilon(1e-15));
  CHECK(average_precision(std::vector{FP, TP}, 2, ApMode::kElevenPoint).ap ==
        doctest::Approx(3.0 / 11.0).epsilon(1e-15));
  CHECK(average_precision(std::vector{TP, TP, FP, FP, TP}, 4,
                          ApMode::kElevenPoint)
            .ap == doctest::Approx(36.0 / 55.0).epsilon(1e-15));
  // Ignored labels do not move the curve.
  CHECK(average_precision(std::vector{TP, IG, FP, TP}, 2).ap ==
        average_precision(tft, 2).ap);
  // Recall short of 1 caps AP.
  CHECK(average_precision(std::vector{TP}, 4).ap == doctest::Approx(0.25));
}

TEST_CASE("all-point AP matches the Riemann oracle and bounds the raw sum") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(1, 25);
  for (int i = 0; i < 150; ++i) {
    const auto labels = random_labels(rng, len(rng));
    const std::size_t tps = std::count(labels.begin(), labels.end(), TP);
    const std::size_t total = tps + std::uniform_int_distribution<int>(0, 5)(rng);
    if (total == 0) continue;
    const double ap = average_precision(labels, total).ap;
    CHECK(std::abs(ap - oracle::riemann_ap(labels, total)) <= 1e-3);

    double raw = 0.0, prev = 0.0;
    for (const PrPoint& p : pr_curve(labels, total)) {
      raw += (p.recall - prev) * p.precision;
      prev = p.recall;
    }
    CHECK(ap >= raw - 1e-12);
  }
}

TEST_CASE("pr curve invariants") {
  std::mt19937_64 rng(4);
  const auto labels = random_labels(rng, 40);
  const std::size_t tps = std::count(labels.begin(), labels.end(), TP);
  const auto pr = pr_curve(labels, tps + 3);
  for (std::size_t i = 0; i < pr.size(); ++i) {
    CHECK(pr[i].precision >= 0.0);
    CHECK(pr[i].precision <= 1.0);
    if (i) CHECK(pr[i].recall >= pr[i - 1].recall);
  }
  CHECK(pr.back().recall == doctest::Approx(double(tps) / double(tps + 3)));
  CHECK(pr_curve(labels, 0).empty());
}

TEST_CASE("evaluate: permuting equal-score detections keeps AP") {
  std::vector<ImageAnnotations> data{{.image_id = "a"}, {.image_id = "b"}};
  data[0].objects = {gt(0, 0, 20, 20), gt(50, 50, 80, 80)};
  data[1].objects = {gt(10, 10, 40, 40)};
  std::vector<Detection> dets{
      det(0, 0, 20, 20, 0.5, "a"),   det(1, 1, 21, 21, 0.5, "a"),
      det(50, 50, 80, 80, 0.5, "a"), det(10, 10, 40, 40, 0.5, "b"),
      det(60, 0, 90, 30, 0.5, "b"),  det(100, 100, 120, 130, 0.7, "b")};
  EvalOptions opt;
  opt.iou_threshold = 0.5;
  const double ap = evaluate(dets, data, opt).ap;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    std::shuffle(dets.begin(), dets.end(), rng);
    CHECK(evaluate(dets, data, opt).ap == ap);
  }
}

TEST_CASE("evaluate: defaults, DontCare, and unknown images") {
  std::vector<ImageAnnotations> data{{.image_id = "a"}};
  data[0].objects = {gt(0, 0, 100, 100), gt(200, 0, 260, 60, std::string(kDontCare)),
                     gt(300, 0, 400, 100, "Pedestrian")};
  const std::vector<Detection> dets{
      det(0, 0, 100, 100, 0.9, "a"), det(200, 0, 260, 60, 0.8, "a"),
      det(300, 0, 400, 100, 0.7, "a"), det(0, 0, 10, 10, 0.6, "zzz")};
  const EvalReport r = evaluate(dets, data);
  CHECK(r.iou_threshold == 0.7);
  CHECK(r.tp == 1);
  CHECK(r.ignored == 1);
  CHECK(r.fp == 2);  // the pedestrian-box car and the unknown image
  CHECK(r.total_gt == 1);
  CHECK(r.ap == 1.0);

  EvalOptions ped;
  ped.class_name = "pedestrian";
  const EvalReport p = evaluate(dets, data, ped);
  CHECK(p.iou_threshold == 0.5);
  CHECK(p.total_gt == 1);
  CHECK(p.tp == 0);
  CHECK(p.no_ground_truth == false);
}

TEST_CASE("scale-bucketed AP") {
  std::vector<ImageAnnotations> data{{.image_id = "a"}};
  data[0].objects = {gt(0, 0, 40, 30), gt(100, 0, 500, 300)};
  const std::vector<Detection> perfect{det(0, 0, 40, 30, 0.9, "a"),
                                       det(100, 0, 500, 300, 0.8, "a")};
  const auto b = scale_bucketed_ap(perfect, data, {0, 128, INFINITY}, 0.7);
  REQUIRE(b.size() == 2);
  CHECK(b[0].ap == 1.0);
  CHECK(b[1].ap == 1.0);
  CHECK(b[0].fp == 0);  // the large detection is ignored in the small bucket

  // Only the large object found.
  const std::vector<Detection> large_only{perfect[1]};
  const auto c = scale_bucketed_ap(large_only, data, {0, 128, INFINITY}, 0.7);
  CHECK(c[0].ap == 0.0);
  CHECK(c[1].ap == 1.0);

  // A bucket without ground truth is undefined, not zero.
  const auto d = scale_bucketed_ap(perfect, data, {0, 128, 256, 300, 1000}, 0.7);
  CHECK_FALSE(d[1].ap.has_value());
  CHECK_FALSE(d[2].ap.has_value());

  // One bucket covering every width equals plain AP.
  std::mt19937_64 rng(3);
  const auto synth = oracle::synthetic_dataset(2, 10, 6, 60);
  std::vector<Detection> noisy;
  std::normal_distribution<double> jitter(0, 3);
  std::uniform_real_distribution<double> u(0, 1);
  for (const auto& img : synth) {
    for (const auto& a : img.objects) {
      if (u(rng) < 0.3) continue;
      const Box& g = a.box;
      noisy.push_back({img.image_id, "Car",
                       Box(g.x1() + jitter(rng), g.y1() + jitter(rng),
                           g.x2() + std::abs(jitter(rng)) + 1, g.y2() + std::abs(jitter(rng)) + 1),
                       u(rng)});
    }
  }
  for (ApMode m : {ApMode::kAllPoint, ApMode::kElevenPoint}) {
    EvalOptions opt;
    opt.mode = m;
    const double global = evaluate(noisy, synth, opt).ap;
    const auto one = scale_bucketed_ap(noisy, synth, {0, INFINITY}, 0.7, m);
    CHECK(one[0].ap == global);
  }
  CHECK_THROWS_AS(scale_bucketed_ap(perfect, data, {0, 0}, 0.7), ConfigError);
}

TEST_CASE("aggregate_folds") {
  CHECK(aggregate_folds(std::vector{0.8}).mean == 0.8);
  CHECK(aggregate_folds(std::vector{0.8}).stddev == 0.0);
  const FoldSummary s = aggregate_folds(std::vector{0.7, 0.9});
  CHECK(s.mean == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.min == 0.7);
  CHECK(s.max == 0.9);
  CHECK(s.stddev == doctest::Approx(std::sqrt(0.02)));
  CHECK_THROWS_AS(aggregate_folds(std::vector<double>{}), InvalidInput);
  CHECK_THROWS_AS(aggregate_folds(std::vector{1.5}), InvalidInput);
}

TEST_CASE("evaluate_folds splits by manifest") {
  std::vector<ImageAnnotations> data{{.image_id = "a"}, {.image_id = "b"}};
  data[0].objects = {gt(0, 0, 50, 50)};
  data[1].objects = {gt(0, 0, 50, 50)};
  const std::vector<Detection> dets{det(0, 0, 50, 50, 0.9, "a")};
  const auto folds = evaluate_folds(dets, data, {{"a", "1"}, {"b", "2"}});
  REQUIRE(folds.size() == 2);
  CHECK(folds[0].fold_id == "1");
  CHECK(folds[0].report.ap == 1.0);
  CHECK(folds[1].report.ap == 0.0);
}

TEST_CASE("ap mode names") {
  CHECK(parse_ap_mode("11-point") == ApMode::kElevenPoint);
  CHECK(parse_ap_mode("all-point") == ApMode::kAllPoint);
  CHECK_THROWS_AS(parse_ap_mode("coco"), ConfigError);
}
