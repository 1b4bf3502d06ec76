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
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "scaledet/error.hpp"
#include "scaledet/netgraph.hpp"

using namespace scaledet;

namespace {

NetGraph load(const std::string& name) {
  std::ifstream in(std::filesystem::path(SCALEDET_DATA_DIR) / "arch" / name);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_arch(buf.str());
}

const Finding& finding(const std::vector<Finding>& fs, const std::string& node) {
  for (const auto& f : fs) {
    if (f.node == node) return f;
  }
  FAIL("no finding for " << node);
  return fs.front();
}

}  // namespace

TEST_CASE("parse: minimal description with implicit input") {
  const NetGraph g = parse_arch("conv c1 k3 s1 p1 from input");
  CHECK(g.size() == 2);
  CHECK(g.input().name == "input");
  CHECK(g.layer("c1").kernel == 3);
  const RFInfo r = receptive_field(g, "c1");
  CHECK(r.receptive_field == 3);
  CHECK(r.cumulative_stride == 1);
}

TEST_CASE("parse errors name the line") {
  const auto line_of = [](std::string_view text) -> std::size_t {
    try {
      parse_arch(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("input d channels=3\nconv a k=3 from convX") == 2);
  CHECK(line_of("input d\nbogus a from d") == 2);
  CHECK(line_of("input d\nconv a k=3 from d\nconv a k=3 from d") == 3);
  CHECK(line_of("input d\nconv a k=3 from b\nconv b k=3 from a") == 2);
  CHECK(line_of("input d\nconcat m from d") == 2);
  CHECK(line_of("input d\nconv a k=0 from d") == 2);
  CHECK(line_of("input d\nconv a k=3 q=1 from d") == 2);
  CHECK_THROWS_AS(parse_arch("input a\ninput b"), ParseError);
}

TEST_CASE("forward references are allowed when acyclic") {
  const NetGraph g = parse_arch("input d\nconv b k=3 from a\nconv a k=3 from d");
  CHECK(g.layers()[1].name == "a");
  CHECK(g.layers()[2].name == "b");
  CHECK(receptive_field(g, "b").receptive_field == 5);
}

TEST_CASE("ZF trunk: 8 nodes, RF chain up to the proposal window") {
  const NetGraph zf = load("zf.arch");
  CHECK(zf.size() == 8);
  const NetGraph g = attach_window(zf, "rpn_window");
  const auto info = analyze(g, 1392, 512);
  std::vector<long> chain;
  for (const auto& r : info) chain.push_back(r.receptive_field);
  CHECK(chain == std::vector<long>{1, 7, 11, 27, 43, 75, 107, 139, 171});
  CHECK(info.back().cumulative_stride == 16);
  CHECK(info[g.index_of("conv5")].channels == 256);
  CHECK(info[g.index_of("conv5")].out_w == 86);
  CHECK(info[g.index_of("conv5")].out_h == 31);
}

TEST_CASE("variants") {
  SUBCASE("multi-layer concat") {
    const NetGraph g = load("zf_ml.arch");
    const auto fs = validate_variant(g, 1392, 512);
    const Finding& f = finding(fs, "ml");
    CHECK(f.ok);
    CHECK(f.channels == 384 + 256);
    CHECK(f.rf_set == std::set<long>{107, 139});
  }
  SUBCASE("multi-scale branches") {
    const NetGraph g = load("zf_ms.arch");
    const auto fs = validate_variant(g, 1392, 512);
    const Finding& f = finding(fs, "ms");
    CHECK(f.ok);
    CHECK(f.rf_set == std::set<long>{107, 139, 171});
    CHECK(receptive_field(g, "ms").receptive_field == 171);
  }
  SUBCASE("residual block") {
    const NetGraph g = load("zf_res.arch");
    const auto fs = validate_variant(g, 1392, 512);
    const Finding& f = finding(fs, "res");
    CHECK(f.ok);
    CHECK(f.channels == 384);
    CHECK(f.rf_set == std::set<long>{107, 171});
    CHECK(receptive_field(g, "res_b").receptive_field == 171);

    const NetGraph bad = load("zf_res_bad.arch");
    const auto bad_fs = validate_variant(bad, 1392, 512);
    const Finding& v = finding(bad_fs, "res");
    CHECK_FALSE(v.ok);
    CHECK(v.message.find("channels") != std::string::npos);
  }
  SUBCASE("combination") {
    const NetGraph g = load("zf_combin.arch");
    for (const Finding& f : validate_variant(g, 1392, 512)) CHECK(f.ok);
    CHECK(receptive_field(g, "combin").rf_set == std::set<long>{107, 139, 171});
  }
}

TEST_CASE("merge checks") {
  const NetGraph g = parse_arch(
      "input d channels=3\n"
      "conv a k=3 s=2 p=1 c=8 from d\n"
      "conv b k=3 s=1 p=1 c=8 from d\n"
      "concat m from a,b\n");
  CHECK_THROWS_AS(analyze(g, 64, 64), InvariantError);
  const auto fs = validate_variant(g, 64, 64);
  REQUIRE(fs.size() == 1);
  CHECK_FALSE(fs[0].ok);
  CHECK(fs[0].message.find("stride") != std::string::npos);

  // Same stride, different spatial size (no padding on one branch).
  const NetGraph h = parse_arch(
      "input d channels=3\n"
      "conv a k=3 s=1 p=0 c=8 from d\n"
      "conv b k=3 s=1 p=1 c=8 from d\n"
      "resadd m from a,b\n");
  const auto hs = validate_variant(h, 64, 64);
  CHECK_FALSE(hs[0].ok);
  CHECK(hs[0].message.find("62x62") != std::string::npos);
}

TEST_CASE("padding changes offset and size, not the receptive field") {
  const NetGraph a = parse_arch("input d\nconv c k=5 s=2 p=0 from d");
  const NetGraph b = parse_arch("input d\nconv c k=5 s=2 p=2 from d");
  const RFInfo ra = receptive_field(a, "c", 32, 32);
  const RFInfo rb = receptive_field(b, "c", 32, 32);
  CHECK(ra.receptive_field == rb.receptive_field);
  CHECK(ra.offset == 2.5);
  CHECK(rb.offset == 0.5);
  CHECK(ra.out_w == 14);
  CHECK(rb.out_w == 16);
}

TEST_CASE("recursion matches the dependency-mask oracle on random graphs") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const bool dag = i % 2 == 1;
    const NetGraph g = oracle::random_graph(rng, 6, dag);
    const auto info = analyze(g, 1024, 1024);
    for (std::size_t l = 1; l < g.size(); ++l) {
      const std::string& name = g.layers()[l].name;
      CHECK(info[l].receptive_field == oracle::mask_receptive_field(g, name, 1024));
      CHECK(info[l].rf_set == oracle::mask_rf_set(g, name, 1024));
      CHECK(*info[l].rf_set.rbegin() == info[l].receptive_field);
    }
  }
}
