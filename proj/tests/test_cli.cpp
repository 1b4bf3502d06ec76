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
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "scaledet/report.hpp"

namespace fs = std::filesystem;
using scaledet::cli::run;

namespace {

const fs::path kData = SCALEDET_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "scaledet_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scaledet");
  return run(args);
}

}  // namespace

TEST_CASE("cli stats") {
  const fs::path out = scratch("stats");
  CHECK(cli({"stats", "--dir", (kData / "kitti_sample").string(), "--include-dontcare",
             "-o", out.string()}) == 0);
  const std::string csv = slurp(out / "stats.csv");
  std::size_t width_total = 0;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "histogram_name,bin_lo,bin_hi,count");
  while (std::getline(lines, line)) {
    if (line.rfind("width,", 0) == 0) width_total += std::stoul(line.substr(line.rfind(',') + 1));
  }
  CHECK(width_total == 12);
  CHECK(fs::exists(out / "width.svg"));
  CHECK(fs::exists(out / "effective_config.toml"));

  const fs::path cars = scratch("stats_car");
  CHECK(cli({"stats", "--dir", (kData / "kitti_sample").string(), "--class", "Car",
             "-o", cars.string()}) == 0);
  CHECK(slurp(cars / "stats.csv").find("width,30,60,3") != std::string::npos);

  CHECK(cli({"stats", "--dir", (kData / "nope").string(), "-o", out.string()}) == 1);
  CHECK(cli({"stats", "--dir", (kData / "arch").string(), "-o", out.string()}) == 2);
  CHECK(cli({"stats"}) == 1);
}

TEST_CASE("cli coverage with comparison") {
  const fs::path out = scratch("coverage");
  CHECK(cli({"coverage", "--dir", (kData / "kitti_sample").string(), "--class", "Car",
             "--scales", "128,256,512", "--compare", "32,64,128,256,512",
             "--thresholds", "0.5", "-o", out.string()}) == 0);
  const std::string delta = slurp(out / "coverage_delta.csv");
  CHECK(delta.rfind("threshold,bucket_lo,bucket_hi,recall_a,recall_b,delta\n", 0) == 0);
  CHECK(fs::exists(out / "attribution_b.csv"));

  CHECK(cli({"coverage", "--dir", (kData / "kitti_sample").string(), "--ratios",
             "0,-1", "-o", out.string()}) == 1);
  CHECK(cli({"coverage", "--dir", (kData / "kitti_sample").string(), "--thresholds",
             "abc", "-o", out.string()}) == 1);
}

TEST_CASE("cli rf") {
  const fs::path out = scratch("rf");
  CHECK(cli({"rf", (kData / "arch" / "zf.arch").string(), "--probe", "rpn_window",
             "-o", out.string()}) == 0);
  const std::string csv = slurp(out / "rf.csv");
  CHECK(csv.find("rpn_window,conv,171,16,171,256,86,31") != std::string::npos);

  CHECK(cli({"rf", (kData / "arch" / "zf_res.arch").string(), "-o", out.string()}) == 0);
  CHECK(slurp(out / "findings.txt").find("res: resadd ok") != std::string::npos);
  CHECK(slurp(out / "rf.csv").find("res,resadd,171,16,107;171,384") != std::string::npos);

  CHECK(cli({"rf", (kData / "arch" / "malformed.arch").string(), "-o", out.string()}) == 2);
  CHECK(cli({"rf", (kData / "arch" / "zf_res_bad.arch").string(), "-o", out.string()}) == 3);
}

TEST_CASE("cli simulate and eval") {
  const fs::path sim = scratch("simulate");
  const std::string dir = (kData / "kitti_sample").string();
  CHECK(cli({"simulate", "--dir", dir, "--profile",
             (kData / "profiles" / "perfect.profile").string(), "-o", sim.string()}) == 0);
  const std::string dets = slurp(sim / "detections.csv");
  CHECK(dets.rfind(std::string(scaledet::kDetectionsHeader), 0) == 0);

  const fs::path ev = scratch("eval");
  const fs::path manifest = ev / "folds.csv";
  std::ofstream(manifest) << "image_id,fold_id\n000000,1\n000001,2\n000002,2\n";
  CHECK(cli({"eval", "--gt-dir", dir, "--detections", (sim / "detections.csv").string(),
             "--folds", manifest.string(), "-o", ev.string()}) == 0);
  CHECK(slurp(ev / "summary.csv").find(",1,0\n") != std::string::npos);  // AP 1, GT present
  const std::string folds = slurp(ev / "folds.csv");
  CHECK(folds.find("#mean,,,,,1\n") != std::string::npos);
  CHECK(fs::exists(ev / "pr.svg"));
  CHECK(fs::exists(ev / "bucket_ap.csv"));

  CHECK(cli({"simulate", "--dir", dir, "--profile", (kData / "none.profile").string(),
             "-o", sim.string()}) == 1);
  CHECK(cli({"eval", "--gt-dir", dir, "--detections", (sim / "detections.csv").string(),
             "--mode", "coco", "-o", ev.string()}) == 1);
}

TEST_CASE("cli config file supplies defaults, flags override") {
  const fs::path out = scratch("config");
  const fs::path cfg = out / "cfg.toml";
  std::ofstream(cfg) << "[rf]\nprobe=\"window_from_config\"\n";
  CHECK(cli({"--config", cfg.string(), "rf", (kData / "arch" / "zf.arch").string(),
             "-o", out.string()}) == 0);
  CHECK(slurp(out / "rf.csv").find("window_from_config,conv,171") != std::string::npos);
  CHECK(cli({"--config", cfg.string(), "rf", (kData / "arch" / "zf.arch").string(),
             "--probe", "flag_window", "-o", out.string()}) == 0);
  CHECK(slurp(out / "rf.csv").find("flag_window,conv,171") != std::string::npos);
  CHECK(slurp(out / "effective_config.toml").find("flag_window") != std::string::npos);
}
