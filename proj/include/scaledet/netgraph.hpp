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

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace scaledet {

enum class LayerKind { kInput, kConv, kPool, kConcat, kResidualAdd };

std::string_view to_string(LayerKind kind);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  // Output channels for input and conv layers; 0 on a conv means "same as
  // its input". Derived for pool/concat/resadd.
  int channels_out = 0;
  std::vector<std::string> inputs;
  std::size_t line = 0;  // source line, 0 when built programmatically
};

// Validated, acyclic layer graph with exactly one input layer. Layers are
// stored in a topological order that follows declaration order where the
// dependencies allow it.
class NetGraph {
 public:
  // Throws ParseError (naming the line when known) for duplicate names,
  // dangling inputs, cycles, wrong input arity or bad kernel/stride values.
  static NetGraph FromLayers(std::vector<LayerSpec> layers);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }
  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws InvalidInput
  const LayerSpec& layer(std::string_view name) const;
  const LayerSpec& input() const { return layers_.front(); }
  // Layers nobody consumes, in topological order.
  std::vector<std::string> sinks() const;

 private:
  std::vector<LayerSpec> layers_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Line-oriented architecture description, one layer per line:
//
//   input  <name> channels=<c>
//   conv   <name> k=<k> s=<s> p=<p> c=<c> from <name>
//   pool   <name> k=<k> s=<s> [p=<p>] from <name>
//   concat <name> from <n1>,<n2>,...
//   resadd <name> from <n1>,<n2>
//
// `#` starts a comment. Parameters may also be written without '='
// ("k3 s1 p1"); s defaults to 1, p to 0. When no input layer is declared an
// implicit 3-channel layer named "input" is added.
NetGraph parse_arch(std::string_view text);

// Appends a kernel x kernel, stride-1, same-padded conv named `name` on
// `from` (default: the graph's single sink). Models the sliding window a
// region proposal head runs over the final feature map.
NetGraph attach_window(const NetGraph& graph, const std::string& name,
                       int kernel = 3,
                       std::optional<std::string> from = std::nullopt);

struct RFInfo {
  std::string layer;
  long receptive_field = 1;   // square side, pixels
  long cumulative_stride = 1; // input pixels between adjacent units
  double offset = 0.5;        // center of unit 0, input pixel coordinates
  std::set<long> rf_set;      // receptive fields over distinct branches
  int channels = 0;
  long out_w = 0;
  long out_h = 0;
};

// Receptive field, jump, and shape of every layer, in graph order.
// Padding only moves the offset and output size, never the receptive field.
// Throws InvariantError when the branches of a merge layer disagree on
// cumulative stride.
std::vector<RFInfo> analyze(const NetGraph& graph, long input_w,
                            long input_h);

RFInfo receptive_field(const NetGraph& graph, std::string_view layer,
                       long input_w = 1392, long input_h = 512);

struct Finding {
  std::string node;
  bool ok = true;
  std::string message;
  int channels = 0;
  std::set<long> rf_set;
};

// Checks every concat/resadd node: inputs must share spatial size and
// stride, and resadd inputs must also share channel counts. One finding per
// merge node, plus one per layer whose output size collapses below 1.
std::vector<Finding> validate_variant(const NetGraph& graph, long input_w,
                                      long input_h);

}  // namespace scaledet
