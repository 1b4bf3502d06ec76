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

#include <optional>
#include <ostream>

namespace scaledet {

// Axis-aligned box in continuous pixel coordinates. (x1, y1) is the top-left
// corner, (x2, y2) the bottom-right; there is no "+1" pixel convention, so
// width() is simply x2 - x1. Construction rejects non-positive sides and
// non-finite coordinates.
class Box {
 public:
  Box(double x1, double y1, double x2, double y2);

  static Box FromCenter(double cx, double cy, double w, double h);

  double x1() const { return x1_; }
  double y1() const { return y1_; }
  double x2() const { return x2_; }
  double y2() const { return y2_; }

  double width() const { return x2_ - x1_; }
  double height() const { return y2_ - y1_; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x1_ + x2_); }
  double cy() const { return 0.5 * (y1_ + y2_); }

  bool operator==(const Box&) const = default;

 private:
  double x1_, y1_, x2_, y2_;
};

std::ostream& operator<<(std::ostream& os, const Box& b);

// Anchor-relative regression target: center offsets in units of the anchor
// size, log-scale size factors.
struct BoxDelta {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;

  bool operator==(const BoxDelta&) const = default;
};

double intersection_area(const Box& a, const Box& b);

// Intersection over union, in [0, 1].
double iou(const Box& a, const Box& b);

BoxDelta encode_delta(const Box& anchor, const Box& target);

// Inverse of encode_delta. Throws InvalidInput for non-finite deltas.
Box decode_delta(const Box& anchor, const BoxDelta& delta);

// Intersection of `b` with [0, image_w] x [0, image_h]; nullopt when empty.
std::optional<Box> clip_box(const Box& b, double image_w, double image_h);

}  // namespace scaledet
