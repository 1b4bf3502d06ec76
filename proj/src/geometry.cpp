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
#include "scaledet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scaledet/error.hpp"

namespace scaledet {

Box::Box(double x1, double y1, double x2, double y2)
    : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) ||
      !std::isfinite(y2)) {
    throw InvalidInput("box has non-finite coordinates");
  }
  if (!(x2 > x1) || !(y2 > y1)) {
    std::ostringstream msg;
    msg << "degenerate box " << *this;
    throw InvalidInput(msg.str());
  }
}

Box Box::FromCenter(double cx, double cy, double w, double h) {
  return Box(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h);
}

std::ostream& operator<<(std::ostream& os, const Box& b) {
  return os << '[' << b.x1() << ',' << b.y1() << ',' << b.x2() << ','
            << b.y2() << ']';
}

double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double h = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoxDelta encode_delta(const Box& anchor, const Box& target) {
  return {(target.cx() - anchor.cx()) / anchor.width(),
          (target.cy() - anchor.cy()) / anchor.height(),
          std::log(target.width() / anchor.width()),
          std::log(target.height() / anchor.height())};
}

Box decode_delta(const Box& anchor, const BoxDelta& d) {
  if (!std::isfinite(d.tx) || !std::isfinite(d.ty) || !std::isfinite(d.tw) ||
      !std::isfinite(d.th)) {
    throw InvalidInput("box delta has non-finite components");
  }
  const double cx = anchor.cx() + d.tx * anchor.width();
  const double cy = anchor.cy() + d.ty * anchor.height();
  const double w = anchor.width() * std::exp(d.tw);
  const double h = anchor.height() * std::exp(d.th);
  // Box's constructor rejects the result if exp() underflowed to zero.
  return Box::FromCenter(cx, cy, w, h);
}

std::optional<Box> clip_box(const Box& b, double image_w, double image_h) {
  const double x1 = std::clamp(b.x1(), 0.0, image_w);
  const double y1 = std::clamp(b.y1(), 0.0, image_h);
  const double x2 = std::clamp(b.x2(), 0.0, image_w);
  const double y2 = std::clamp(b.y2(), 0.0, image_h);
  if (!(x2 > x1) || !(y2 > y1)) return std::nullopt;
  return Box(x1, y1, x2, y2);
}

}  // namespace scaledet
