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
#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "scaledet/anchors.hpp"
#include "scaledet/datasets.hpp"
#include "scaledet/error.hpp"
#include "scaledet/evaluation.hpp"
#include "scaledet/netgraph.hpp"
#include "scaledet/report.hpp"
#include "scaledet/simulate.hpp"
#include "scaledet/text.hpp"

namespace scaledet::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << content;
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InvalidInput("cannot create output directory " + dir);
  }
  return fs::path(dir);
}

AnnotationFormat parse_format(const std::string& s) {
  if (s == "kitti") return AnnotationFormat::kKitti;
  if (s == "voc") return AnnotationFormat::kVoc;
  throw ConfigError("unknown format '" + s + "' (expected kitti or voc)");
}

std::pair<double, double> parse_size(const std::string& s) {
  const auto x = s.find('x');
  const auto w = text::to_double(std::string_view(s).substr(0, x));
  const auto h = x == std::string::npos
                     ? std::nullopt
                     : text::to_double(std::string_view(s).substr(x + 1));
  if (!w || !h || !(*w > 0) || !(*h > 0)) {
    throw ConfigError("image size must be WxH with positive sides, got '" + s +
                      "'");
  }
  return {*w, *h};
}

std::vector<ImageAnnotations> load_dataset(const std::string& dir,
                                           const std::string& format,
                                           bool skip_bad,
                                           std::vector<std::string>* skipped) {
  LoadResult r = load_annotation_dir(dir, parse_format(format), skip_bad);
  if (r.images.empty()) {
    throw ParseError("no parseable " + format + " annotation files in " + dir);
  }
  if (skipped) *skipped = std::move(r.skipped);
  return std::move(r.images);
}

// Shared by every subcommand.
struct Common {
  std::string out_dir;
};

struct StatsArgs {
  std::string dir;
  std::string format = "kitti";
  std::string class_filter;
  std::string edges = "0,30,60,90,120,180,256,384,512,inf";
  std::string aspect_edges = "0,0.25,0.5,0.75,1,1.25,1.5,2,3,inf";
  bool include_dont_care = false;
  bool skip_bad = false;
};

struct CoverageArgs {
  std::string dir;
  std::string format = "kitti";
  std::string class_filter;
  std::string scales = "128,256,512";
  std::string ratios = "0.5,1,2";
  double stride = 16;
  bool keep_border = false;
  bool clip_border = false;
  bool drop_border = false;
  std::string thresholds = "0.5,0.7";
  std::string buckets = "0,30,60,90,120,180,256,384,512,inf";
  std::string image_size = "1392x512";
  std::string compare;
  std::string compare_ratios;
};

struct RfArgs {
  std::string arch;
  std::string probe;
  int probe_kernel = 3;
  std::string probe_from;
  std::string input_size = "1392x512";
};

struct EvalArgs {
  std::string gt_dir;
  std::string format = "kitti";
  std::string detections;
  std::string class_name = "Car";
  double iou = 0.0;  // 0: per-class default
  std::string buckets = "0,30,60,90,120,180,256,384,512,inf";
  std::string mode = "all-point";
  std::string folds;
};

struct SimulateArgs {
  std::string dir;
  std::string format = "kitti";
  std::string profile;
  long long seed = -1;  // -1: take the profile's seed
};

void echo_config(const CLI::App& app, const fs::path& out) {
  write_file(out / "effective_config.toml",
             "[" + app.get_name() + "]\n" + app.config_to_str(true, false));
}

int cmd_stats(const StatsArgs& a, const Common& c, const CLI::App& app) {
  std::vector<std::string> skipped;
  const auto images = load_dataset(a.dir, a.format, a.skip_bad, &skipped);
  StatsOptions opt;
  if (!a.class_filter.empty()) opt.class_filter = a.class_filter;
  opt.size_edges = text::to_double_list(a.edges, "--edges");
  opt.aspect_edges = text::to_double_list(a.aspect_edges, "--aspect-edges");
  opt.include_dont_care = a.include_dont_care;

  std::vector<Annotation> all;
  for (const auto& img : images) {
    all.insert(all.end(), img.objects.begin(), img.objects.end());
  }
  DatasetStats stats = compute_stats(all, opt);
  // Images without any object still count.
  stats.image_count = images.size();

  const fs::path out = prepare_out_dir(c.out_dir);
  write_file(out / "stats.csv", stats_csv(stats));
  write_file(out / "class_counts.csv", class_counts_csv(stats));
  for (const Histogram* h : stats.histograms()) {
    write_file(out / (h->name() + ".svg"), histogram_svg(*h));
  }
  if (!skipped.empty()) {
    std::string s;
    for (const auto& line : skipped) s += line + '\n';
    write_file(out / "skipped.txt", s);
  }
  echo_config(app, out);

  const std::size_t mode = stats.width.mode_bin();
  std::cout << "images: " << stats.image_count
            << "  objects: " << stats.width.total()
            << "  images with objects: " << stats.images_with_matches
            << "\nmodal width bin: [" << text::fmt(stats.width.edges()[mode])
            << ", " << text::fmt(stats.width.edges()[mode + 1]) << ")\n";
  return kOk;
}

AnchorConfig anchor_config(const std::string& scales,
                           const std::string& ratios, const CoverageArgs& a) {
  AnchorConfig cfg;
  cfg.scales = text::to_double_list(scales, "--scales");
  cfg.ratios = text::to_double_list(ratios, "--ratios");
  cfg.stride = a.stride;
  if (a.keep_border + a.clip_border + a.drop_border > 1) {
    throw ConfigError("choose one of --keep-border, --clip-border, --drop-border");
  }
  cfg.border = a.drop_border   ? BorderPolicy::kDiscard
               : a.clip_border ? BorderPolicy::kClip
                               : BorderPolicy::kKeep;
  cfg.validate();
  return cfg;
}

int cmd_coverage(const CoverageArgs& a, const Common& c, const CLI::App& app) {
  const AnchorConfig cfg = anchor_config(a.scales, a.ratios, a);
  std::optional<AnchorConfig> alt;
  if (!a.compare.empty()) {
    alt = anchor_config(a.compare,
                        a.compare_ratios.empty() ? a.ratios : a.compare_ratios,
                        a);
  }
  CoverageOptions opt;
  opt.thresholds = text::to_double_list(a.thresholds, "--thresholds");
  opt.bucket_edges = text::to_double_list(a.buckets, "--buckets");
  if (!a.class_filter.empty()) opt.class_filter = a.class_filter;
  std::tie(opt.default_image_w, opt.default_image_h) = parse_size(a.image_size);

  const auto images = load_dataset(a.dir, a.format, false, nullptr);
  const CoverageReport report = coverage(cfg, images, opt);
  const fs::path out = prepare_out_dir(c.out_dir);
  write_file(out / "coverage.csv", coverage_csv(report));
  write_file(out / "attribution.csv", attribution_csv(report));

  const auto print = [&opt](const char* label, const CoverageReport& r) {
    std::cout << label << " anchors/image " << text::fmt(r.anchors_per_image());
    for (std::size_t t = 0; t < opt.thresholds.size(); ++t) {
      const auto rec = r.overall[t].recall();
      std::cout << "  recall@" << text::fmt(opt.thresholds[t]) << '='
                << (rec ? text::fmt(*rec) : "NA");
    }
    std::cout << '\n';
  };
  print("a:", report);
  if (alt) {
    const CoverageReport other = coverage(*alt, images, opt);
    write_file(out / "coverage_b.csv", coverage_csv(other));
    write_file(out / "attribution_b.csv", attribution_csv(other));
    write_file(out / "coverage_delta.csv", coverage_delta_csv(report, other));
    print("b:", other);
  }
  echo_config(app, out);
  return kOk;
}

int cmd_rf(const RfArgs& a, const Common& c, const CLI::App& app) {
  NetGraph g = parse_arch(read_file(a.arch));
  if (!a.probe.empty() && !g.contains(a.probe)) {
    g = attach_window(g, a.probe, a.probe_kernel,
                      a.probe_from.empty() ? std::nullopt
                                           : std::optional(a.probe_from));
  }
  const auto [w, h] = parse_size(a.input_size);
  const auto findings =
      validate_variant(g, static_cast<long>(w), static_cast<long>(h));
  const fs::path out = prepare_out_dir(c.out_dir);
  write_file(out / "findings.txt", findings_text(findings));
  const auto info = analyze(g, static_cast<long>(w), static_cast<long>(h));
  write_file(out / "rf.csv", rf_csv(g, info));
  echo_config(app, out);

  const std::string target = a.probe.empty() ? g.sinks().back() : a.probe;
  const RFInfo& r = info[g.index_of(target)];
  std::cout << target << ": rf " << r.receptive_field << " stride "
            << r.cumulative_stride << " rf_set {";
  bool first = true;
  for (long v : r.rf_set) {
    std::cout << (first ? "" : ",") << v;
    first = false;
  }
  std::cout << "}\n" << findings_text(findings);
  bool ok = true;
  for (const auto& f : findings) ok = ok && f.ok;
  return ok ? kOk : kInternalError;
}

int cmd_eval(const EvalArgs& a, const Common& c, const CLI::App& app) {
  EvalOptions opt;
  opt.class_name = a.class_name;
  if (a.iou > 0.0) opt.iou_threshold = a.iou;
  opt.mode = parse_ap_mode(a.mode);
  opt.bucket_edges = text::to_double_list(a.buckets, "--buckets");

  const auto images = load_dataset(a.gt_dir, a.format, false, nullptr);
  const auto dets = read_detections_csv(read_file(a.detections));
  const EvalReport report = evaluate(dets, images, opt);

  const fs::path out = prepare_out_dir(c.out_dir);
  write_file(out / "summary.csv", eval_summary_csv(report));
  write_file(out / "pr.csv", pr_csv(report));
  write_file(out / "bucket_ap.csv", bucket_ap_csv(report.buckets));

  std::vector<std::pair<std::string, std::vector<PrPoint>>> curves{
      {"all (AP " + text::fmt(report.ap) + ")", report.pr_points}};
  std::cout << "AP " << text::fmt(report.ap) << " (" << to_string(report.mode)
            << ", IoU " << text::fmt(report.iou_threshold) << ", "
            << report.tp << " TP, " << report.fp << " FP, " << report.total_gt
            << " GT)\n";
  if (!a.folds.empty()) {
    const auto manifest = read_fold_manifest(read_file(a.folds));
    const auto folds = evaluate_folds(dets, images, manifest, opt);
    std::vector<double> aps;
    for (const auto& f : folds) {
      aps.push_back(f.report.ap);
      curves.emplace_back("fold " + f.fold_id, f.report.pr_points);
    }
    const FoldSummary summary = aggregate_folds(aps);
    write_file(out / "folds.csv", folds_csv(folds, summary));
    std::cout << "folds: " << summary.count << "  mean AP "
              << text::fmt(summary.mean) << "  stddev "
              << text::fmt(summary.stddev) << '\n';
  }
  write_file(out / "pr.svg", pr_svg(curves));
  echo_config(app, out);
  return kOk;
}

int cmd_simulate(const SimulateArgs& a, const Common& c, const CLI::App& app) {
  if (!fs::is_regular_file(a.profile)) {
    throw InvalidInput("profile file not found: " + a.profile);
  }
  DetectorProfile profile = parse_profile(read_file(a.profile));
  if (a.seed >= 0) profile.seed = static_cast<std::uint64_t>(a.seed);
  const auto images = load_dataset(a.dir, a.format, false, nullptr);
  const auto dets = simulate(images, profile);

  const fs::path out = prepare_out_dir(c.out_dir);
  write_file(out / "detections.csv", write_detections_csv(dets));
  write_file(out / "profile_effective.txt", format_profile(profile));
  echo_config(app, out);
  std::cout << dets.size() << " detections for " << images.size()
            << " images\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Scale-aware detection toolkit: dataset statistics, anchor "
               "coverage, receptive fields, evaluation, simulation."};
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);

  Common common;
  const char* env_out = std::getenv("SCALEDET_OUT");
  common.out_dir = env_out && *env_out ? env_out : "scaledet_out";
  const auto add_out = [&common](CLI::App* sub) {
    sub->add_option("-o,--out", common.out_dir,
                    "Output directory (default $SCALEDET_OUT or ./scaledet_out)");
  };

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "Scale and aspect histograms");
  s->add_option("--dir", stats.dir, "Annotation directory")->required();
  s->add_option("--format", stats.format, "kitti or voc")->capture_default_str();
  s->add_option("--class", stats.class_filter, "Only this class");
  s->add_option("--edges", stats.edges, "Size bin edges (px)")->capture_default_str();
  s->add_option("--aspect-edges", stats.aspect_edges, "h/w bin edges")
      ->capture_default_str();
  s->add_flag("--include-dontcare", stats.include_dont_care);
  s->add_flag("--skip-bad", stats.skip_bad, "Skip unparseable files");
  add_out(s);

  CoverageArgs cov;
  auto* cv = app.add_subcommand("coverage", "Anchor recall against ground truth");
  cv->add_option("--dir", cov.dir, "Annotation directory")->required();
  cv->add_option("--format", cov.format)->capture_default_str();
  cv->add_option("--class", cov.class_filter, "Only this class");
  cv->add_option("--scales", cov.scales, "sqrt(area) list")->capture_default_str();
  cv->add_option("--ratios", cov.ratios, "h/w list")->capture_default_str();
  cv->add_option("--stride", cov.stride)->capture_default_str();
  cv->add_flag("--keep-border", cov.keep_border, "Keep border anchors unclipped (default)");
  cv->add_flag("--clip-border", cov.clip_border, "Clip border anchors to the image");
  cv->add_flag("--drop-border", cov.drop_border, "Drop anchors leaving the image");
  cv->add_option("--thresholds", cov.thresholds)->capture_default_str();
  cv->add_option("--buckets", cov.buckets, "GT width bucket edges")
      ->capture_default_str();
  cv->add_option("--image-size", cov.image_size, "WxH when the format has none")
      ->capture_default_str();
  cv->add_option("--compare", cov.compare, "Second scale list to compare against");
  cv->add_option("--compare-ratios", cov.compare_ratios, "Ratios of the second config");
  add_out(cv);

  RfArgs rf;
  auto* r = app.add_subcommand("rf", "Receptive fields of an architecture");
  r->add_option("arch,--arch", rf.arch, "Architecture description")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_option("--probe", rf.probe,
                "Report this layer; if absent, attach a sliding window of that name");
  r->add_option("--probe-kernel", rf.probe_kernel)->capture_default_str();
  r->add_option("--probe-from", rf.probe_from, "Layer the window attaches to");
  r->add_option("--input-size", rf.input_size)->capture_default_str();
  add_out(r);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "AP, PR curve and scale-bucketed AP");
  e->add_option("--gt-dir", ev.gt_dir, "Ground-truth directory")->required();
  e->add_option("--format", ev.format)->capture_default_str();
  e->add_option("--detections", ev.detections, "Detections CSV")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--class", ev.class_name)->capture_default_str();
  e->add_option("--iou", ev.iou, "IoU threshold (default 0.7 car, 0.5 other)");
  e->add_option("--buckets", ev.buckets, "GT width bucket edges")
      ->capture_default_str();
  e->add_option("--mode", ev.mode, "all-point or 11-point")->capture_default_str();
  e->add_option("--folds", ev.folds, "image_id,fold_id manifest")
      ->check(CLI::ExistingFile);
  add_out(e);

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Synthetic detections from ground truth");
  m->add_option("--dir", sim.dir, "Annotation directory")->required();
  m->add_option("--format", sim.format)->capture_default_str();
  m->add_option("--profile", sim.profile, "Detector profile")->required();
  m->add_option("--seed", sim.seed, "Overrides the profile seed");
  add_out(m);

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::Success& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kUsageError;
  }

  try {
    if (s->parsed()) return cmd_stats(stats, common, *s);
    if (cv->parsed()) return cmd_coverage(cov, common, *cv);
    if (r->parsed()) return cmd_rf(rf, common, *r);
    if (e->parsed()) return cmd_eval(ev, common, *e);
    if (m->parsed()) return cmd_simulate(sim, common, *m);
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << '\n';
    return kParseError;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kUsageError;
  } catch (const InvalidInput& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsageError;
  } catch (const InvariantError& err) {
    std::cerr << "invariant violation: " << err.what() << '\n';
    return kInternalError;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return kInternalError;
  }
  return kUsageError;
}

}  // namespace scaledet::cli
