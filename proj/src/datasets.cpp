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
#include "scaledet/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "scaledet/error.hpp"
#include "scaledet/text.hpp"

namespace scaledet {
namespace {

constexpr std::array<std::string_view, 15> kKittiFields{
    "type",   "truncated", "occluded", "alpha", "bbox_left",
    "bbox_top", "bbox_right", "bbox_bottom", "height", "width",
    "length", "x",         "y",        "z",     "rotation_y"};

double kitti_number(std::string_view tok, std::size_t field,
                    std::size_t line) {
  const auto v = text::to_double(tok);
  if (!v) {
    throw ParseError("field " + std::to_string(field + 1) + " (" +
                         std::string(kKittiFields[field]) +
                         ") is not numeric: '" + std::string(tok) + "'",
                     line);
  }
  return *v;
}

Annotation parse_kitti_line(std::string_view line_text, std::size_t line,
                            std::string_view image_id) {
  const auto tok = text::split_ws(line_text);
  if (tok.size() < 15 || tok.size() > 16) {
    throw ParseError("expected 15 or 16 fields, got " +
                         std::to_string(tok.size()) +
                         (tok.size() < 15 ? " (missing field " +
                                                std::to_string(tok.size() + 1) +
                                                ", " +
                                                std::string(
                                                    kKittiFields[tok.size()]) +
                                                ")"
                                          : std::string()),
                     line);
  }
  double v[15];
  for (std::size_t i = 1; i < 15; ++i) v[i] = kitti_number(tok[i], i, line);
  if (v[2] != std::floor(v[2])) {
    throw ParseError("field 3 (occluded) is not an integer", line);
  }

  std::optional<Box> box;
  try {
    box.emplace(v[4], v[5], v[6], v[7]);
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("field 5-8 (bbox): ") + e.what(), line);
  }

  Annotation a{.class_name = std::string(tok[0]), .box = *box};
  a.truncated = v[1];
  a.occluded = static_cast<int>(v[2]);
  a.alpha = v[3];
  a.dimensions = {v[8], v[9], v[10]};
  a.location = {v[11], v[12], v[13]};
  a.rotation_y = v[14];
  a.source_image = std::string(image_id);
  if (tok.size() == 16) {
    const auto s = text::to_double(tok[15]);
    if (!s) throw ParseError("field 16 (score) is not numeric", line);
    a.score = *s;
  }
  return a;
}

}  // namespace

std::vector<Annotation> parse_kitti_label(std::string_view text,
                                          std::string_view image_id) {
  std::vector<Annotation> out;
  std::size_t line = 0;
  for (std::string_view raw : text::split(text, '\n')) {
    ++line;
    if (text::trim(raw).empty()) continue;
    out.push_back(parse_kitti_line(raw, line, image_id));
  }
  return out;
}

std::string format_kitti_line(const Annotation& a) {
  std::string s = a.class_name;
  const auto put = [&s](double x) {
    s += ' ';
    s += text::fmt(x);
  };
  put(a.truncated);
  s += ' ';
  s += std::to_string(a.occluded);
  put(a.alpha);
  put(a.box.x1());
  put(a.box.y1());
  put(a.box.x2());
  put(a.box.y2());
  for (double d : a.dimensions) put(d);
  for (double d : a.location) put(d);
  put(a.rotation_y);
  if (a.score) put(*a.score);
  return s;
}

VocAnnotation parse_voc_xml(std::string_view xml, std::string_view image_id) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed VOC XML: " + e.message(), e.line());
  }
  const auto root = tree.get_child_optional("annotation");
  if (!root) throw ParseError("missing <annotation> root element");

  const auto number = [](const pt::ptree& node, const std::string& path,
                         const std::string& where) {
    const auto s = node.get_optional<std::string>(path);
    if (!s) throw ParseError(where + ": missing <" + path + ">");
    const auto v = text::to_double(*s);
    if (!v) throw ParseError(where + ": <" + path + "> is not numeric");
    return *v;
  };

  VocAnnotation out;
  out.image_w = static_cast<int>(number(*root, "size.width", "size"));
  out.image_h = static_cast<int>(number(*root, "size.height", "size"));

  std::size_t index = 0;
  for (const auto& [key, obj] : *root) {
    if (key != "object") continue;
    const std::string where = "object " + std::to_string(index);
    const auto name = obj.get_optional<std::string>("name");
    if (!name || text::trim(*name).empty()) {
      throw ParseError(where + ": missing <name>");
    }
    const auto bnd = obj.get_child_optional("bndbox");
    if (!bnd) throw ParseError(where + ": missing <bndbox>");
    const double xmin = number(*bnd, "xmin", where);
    const double ymin = number(*bnd, "ymin", where);
    const double xmax = number(*bnd, "xmax", where);
    const double ymax = number(*bnd, "ymax", where);

    std::optional<Box> box;
    try {
      box.emplace(xmin - 1.0, ymin - 1.0, xmax, ymax);
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + ": " + e.what());
    }
    Annotation a{.class_name = std::string(text::trim(*name)), .box = *box};
    a.truncated = obj.get<double>("truncated", 0.0);
    a.occluded = obj.get<int>("occluded", 0);
    a.difficult = obj.get<int>("difficult", 0) != 0;
    a.source_image = std::string(image_id);
    a.image_w = out.image_w;
    a.image_h = out.image_h;
    out.objects.push_back(std::move(a));
    ++index;
  }
  return out;
}

LoadResult load_annotation_dir(const std::filesystem::path& dir,
                               AnnotationFormat format, bool skip_bad) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw InvalidInput("not a readable directory: " + dir.string());
  }
  const std::string ext = format == AnnotationFormat::kKitti ? ".txt" : ".xml";
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  LoadResult result;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string id = path.stem().string();
    try {
      ImageAnnotations img{.image_id = id};
      if (format == AnnotationFormat::kKitti) {
        img.objects = parse_kitti_label(buf.str(), id);
      } else {
        auto voc = parse_voc_xml(buf.str(), id);
        img.image_w = voc.image_w;
        img.image_h = voc.image_h;
        img.objects = std::move(voc.objects);
      }
      result.images.push_back(std::move(img));
    } catch (const ParseError& e) {
      if (!skip_bad) {
        throw ParseError(path.filename().string() + ": " + e.what());
      }
      result.skipped.push_back(path.filename().string() + ": " + e.what());
    } catch (const InvalidInput& e) {
      if (!skip_bad) {
        throw ParseError(path.filename().string() + ": " + e.what());
      }
      result.skipped.push_back(path.filename().string() + ": " + e.what());
    }
  }
  return result;
}

Histogram::Histogram(std::string name, std::vector<double> edges)
    : name_(std::move(name)), edges_(std::move(edges)) {
  if (edges_.size() < 2) {
    throw ConfigError("histogram '" + name_ + "' needs at least 2 bin edges");
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (std::isnan(edges_[i]) || (i > 0 && !(edges_[i] > edges_[i - 1]))) {
      throw ConfigError("histogram '" + name_ +
                        "' bin edges must be strictly increasing");
    }
  }
  counts_.assign(edges_.size() - 1, 0);
}

std::size_t Histogram::bin_of(double value) const {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), value);
  const auto idx = static_cast<std::ptrdiff_t>(it - edges_.begin()) - 1;
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(idx, 0, counts_.size() - 1));
}

void Histogram::add(double value, std::size_t n) { counts_[bin_of(value)] += n; }

void Histogram::merge(const Histogram& other) {
  if (other.edges_ != edges_) {
    throw InvalidInput("cannot merge histograms with different edges");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::size_t Histogram::mode_bin() const {
  return static_cast<std::size_t>(
      std::max_element(counts_.begin(), counts_.end()) - counts_.begin());
}

void DatasetStats::merge(const DatasetStats& other) {
  width.merge(other.width);
  height.merge(other.height);
  sqrt_area.merge(other.sqrt_area);
  aspect.merge(other.aspect);
  for (const auto& [k, v] : other.class_counts) class_counts[k] += v;
  image_count += other.image_count;
  images_with_matches += other.images_with_matches;
}

std::vector<const Histogram*> DatasetStats::histograms() const {
  return {&width, &height, &sqrt_area, &aspect};
}

bool class_matches(std::string_view class_name, std::string_view filter) {
  return text::iequals(class_name, filter);
}

DatasetStats compute_stats(const std::vector<Annotation>& annotations,
                           const StatsOptions& options) {
  DatasetStats stats{
      .width = Histogram("width", options.size_edges),
      .height = Histogram("height", options.size_edges),
      .sqrt_area = Histogram("sqrt_area", options.size_edges),
      .aspect = Histogram("aspect_hw", options.aspect_edges),
  };
  std::set<std::string_view> images;
  std::set<std::string_view> matched_images;
  for (const Annotation& a : annotations) {
    stats.class_counts[a.class_name] += 1;
    images.insert(a.source_image);
    if (a.is_dont_care() && !options.include_dont_care) continue;
    if (options.class_filter && !class_matches(a.class_name, *options.class_filter)) {
      continue;
    }
    matched_images.insert(a.source_image);
    stats.width.add(a.box.width());
    stats.height.add(a.box.height());
    stats.sqrt_area.add(std::sqrt(a.box.area()));
    stats.aspect.add(a.box.height() / a.box.width());
  }
  stats.image_count = images.size();
  stats.images_with_matches = matched_images.size();
  return stats;
}

std::vector<Fold> make_random_folds(std::vector<std::string> image_ids,
                                    std::size_t num_folds,
                                    std::size_t test_size,
                                    std::size_t train_size,
                                    std::uint64_t seed) {
  std::sort(image_ids.begin(), image_ids.end());
  image_ids.erase(std::unique(image_ids.begin(), image_ids.end()),
                  image_ids.end());
  if (num_folds == 0) throw InvalidInput("need at least one fold");
  if (test_size + train_size > image_ids.size()) {
    throw InvalidInput("fold sizes exceed the number of images (" +
                       std::to_string(image_ids.size()) + ")");
  }
  const std::size_t n_train =
      train_size == 0 ? image_ids.size() - test_size : train_size;

  std::vector<Fold> folds;
  for (std::size_t f = 0; f < num_folds; ++f) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(f)};
    std::mt19937_64 rng(seq);
    std::vector<std::string> ids = image_ids;
    std::shuffle(ids.begin(), ids.end(), rng);
    Fold fold;
    fold.test.assign(ids.begin(), ids.begin() + test_size);
    fold.train.assign(ids.begin() + test_size,
                      ids.begin() + test_size + n_train);
    std::sort(fold.test.begin(), fold.test.end());
    std::sort(fold.train.begin(), fold.train.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace scaledet
