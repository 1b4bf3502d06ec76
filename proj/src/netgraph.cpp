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
#include "scaledet/netgraph.hpp"

#include <algorithm>
#include <sstream>

#include "scaledet/error.hpp"
#include "scaledet/text.hpp"

namespace scaledet {
namespace {

std::string where(const LayerSpec& l) {
  return "layer '" + l.name + "'";
}

[[noreturn]] void fail(const LayerSpec& l, const std::string& msg) {
  throw ParseError(where(l) + ": " + msg, l.line);
}

bool is_merge(LayerKind k) {
  return k == LayerKind::kConcat || k == LayerKind::kResidualAdd;
}

long out_size(long n, const LayerSpec& l) {
  if (!(l.kind == LayerKind::kConv || l.kind == LayerKind::kPool)) return n;
  const long span = n + 2L * l.padding - l.kernel;
  if (span < 0) return 0;
  return span / l.stride + 1;
}

struct Analysis {
  std::vector<RFInfo> info;
  // Merge layers whose branches disagree on cumulative stride.
  std::vector<std::pair<std::size_t, std::string>> stride_conflicts;
};

Analysis analyze_lenient(const NetGraph& graph, long input_w, long input_h) {
  Analysis out;
  const auto& layers = graph.layers();
  out.info.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    RFInfo r;
    r.layer = l.name;
    if (l.kind == LayerKind::kInput) {
      r.rf_set = {1};
      r.channels = l.channels_out;
      r.out_w = input_w;
      r.out_h = input_h;
      out.info.push_back(std::move(r));
      continue;
    }
    const RFInfo& first = out.info[graph.index_of(l.inputs.front())];
    if (is_merge(l.kind)) {
      r = first;
      r.layer = l.name;
      r.channels = 0;
      for (const std::string& name : l.inputs) {
        const RFInfo& in = out.info[graph.index_of(name)];
        r.rf_set.insert(in.rf_set.begin(), in.rf_set.end());
        if (l.kind == LayerKind::kConcat) r.channels += in.channels;
        if (in.cumulative_stride != first.cumulative_stride) {
          std::ostringstream msg;
          msg << "branch '" << name << "' has stride " << in.cumulative_stride
              << " but '" << l.inputs.front() << "' has stride "
              << first.cumulative_stride;
          out.stride_conflicts.emplace_back(i, msg.str());
        }
      }
      if (l.kind == LayerKind::kResidualAdd) r.channels = first.channels;
      r.receptive_field = *r.rf_set.rbegin();
    } else {
      const long grow = static_cast<long>(l.kernel - 1) * first.cumulative_stride;
      r.receptive_field = first.receptive_field + grow;
      for (long v : first.rf_set) r.rf_set.insert(v + grow);
      r.cumulative_stride = first.cumulative_stride * l.stride;
      r.offset = first.offset +
                 (0.5 * (l.kernel - 1) - l.padding) *
                     static_cast<double>(first.cumulative_stride);
      r.channels = l.kind == LayerKind::kConv && l.channels_out > 0
                       ? l.channels_out
                       : first.channels;
      r.out_w = out_size(first.out_w, l);
      r.out_h = out_size(first.out_h, l);
    }
    out.info.push_back(std::move(r));
  }
  return out;
}

void set_param(LayerSpec& l, std::string_view key, std::string_view value) {
  const auto v = text::to_int(value);
  if (!v) fail(l, "parameter '" + std::string(key) + "' is not an integer");
  const int n = static_cast<int>(*v);
  if (key == "k") {
    l.kernel = n;
  } else if (key == "s") {
    l.stride = n;
  } else if (key == "p") {
    l.padding = n;
  } else if (key == "c" || key == "channels") {
    l.channels_out = n;
  } else {
    fail(l, "unknown parameter '" + std::string(key) + "'");
  }
}

// Accepts "k=3" and "k3"; returns false when `tok` is not a parameter.
bool parse_param(LayerSpec& l, std::string_view tok) {
  if (const auto eq = tok.find('='); eq != std::string_view::npos) {
    set_param(l, tok.substr(0, eq), tok.substr(eq + 1));
    return true;
  }
  std::size_t key_len = 0;
  while (key_len < tok.size() &&
         !(tok[key_len] >= '0' && tok[key_len] <= '9') && tok[key_len] != '-') {
    ++key_len;
  }
  if (key_len == 0 || key_len == tok.size()) return false;
  set_param(l, tok.substr(0, key_len), tok.substr(key_len));
  return true;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kInput: return "input";
    case LayerKind::kConv: return "conv";
    case LayerKind::kPool: return "pool";
    case LayerKind::kConcat: return "concat";
    case LayerKind::kResidualAdd: return "resadd";
  }
  return "?";
}

NetGraph NetGraph::FromLayers(std::vector<LayerSpec> layers) {
  std::map<std::string, std::size_t, std::less<>> pos;
  std::size_t inputs = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.name.empty()) throw ParseError("layer without a name", l.line);
    if (!pos.emplace(l.name, i).second) fail(l, "duplicate layer name");
    switch (l.kind) {
      case LayerKind::kInput:
        ++inputs;
        if (!l.inputs.empty()) fail(l, "input layers take no inputs");
        if (l.channels_out < 1) fail(l, "channels must be >= 1");
        break;
      case LayerKind::kConv:
      case LayerKind::kPool:
        if (l.inputs.size() != 1) fail(l, "expects exactly one input");
        if (l.kernel < 1) fail(l, "kernel must be >= 1");
        if (l.stride < 1) fail(l, "stride must be >= 1");
        if (l.padding < 0) fail(l, "padding must be >= 0");
        if (l.channels_out < 0) fail(l, "channels must be >= 1");
        break;
      case LayerKind::kConcat:
      case LayerKind::kResidualAdd:
        if (l.inputs.size() < 2) fail(l, "merge layers need >= 2 inputs");
        break;
    }
  }
  if (inputs != 1) {
    throw ParseError("graph needs exactly one input layer, found " +
                     std::to_string(inputs));
  }
  for (const LayerSpec& l : layers) {
    for (const std::string& in : l.inputs) {
      if (!pos.contains(in)) fail(l, "dangling reference to '" + in + "'");
      if (in == l.name) fail(l, "layer consumes itself (cycle)");
    }
  }

  // Kahn's algorithm, always taking the earliest-declared ready layer.
  std::vector<std::size_t> pending(layers.size());
  std::vector<std::vector<std::size_t>> consumers(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    pending[i] = layers[i].inputs.size();
    for (const std::string& in : layers[i].inputs) {
      consumers[pos.at(in)].push_back(i);
    }
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (pending[i] == 0) ready.insert(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t c : consumers[i]) {
      if (--pending[c] == 0) ready.insert(c);
    }
  }
  if (order.size() != layers.size()) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (pending[i] != 0) fail(layers[i], "dependency cycle");
    }
  }

  NetGraph g;
  for (std::size_t i : order) g.layers_.push_back(std::move(layers[i]));
  for (std::size_t i = 0; i < g.layers_.size(); ++i) {
    g.index_.emplace(g.layers_[i].name, i);
  }
  return g;
}

bool NetGraph::contains(std::string_view name) const {
  return index_.find(name) != index_.end();
}

std::size_t NetGraph::index_of(std::string_view name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) {
    throw InvalidInput("no layer named '" + std::string(name) + "'");
  }
  return it->second;
}

const LayerSpec& NetGraph::layer(std::string_view name) const {
  return layers_[index_of(name)];
}

std::vector<std::string> NetGraph::sinks() const {
  std::set<std::string_view> consumed;
  for (const auto& l : layers_) {
    for (const auto& in : l.inputs) consumed.insert(in);
  }
  std::vector<std::string> out;
  for (const auto& l : layers_) {
    if (!consumed.contains(l.name)) out.push_back(l.name);
  }
  return out;
}

NetGraph parse_arch(std::string_view text) {
  std::vector<LayerSpec> layers;
  std::size_t line = 0;
  bool has_input = false;
  for (std::string_view raw : text::split(text, '\n')) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    const auto tok = text::split_ws(raw);
    if (tok.empty()) continue;

    LayerSpec l;
    l.line = line;
    const std::string_view kind = tok[0];
    if (kind == "input") {
      l.kind = LayerKind::kInput;
      l.channels_out = 3;
      has_input = true;
    } else if (kind == "conv") {
      l.kind = LayerKind::kConv;
    } else if (kind == "pool") {
      l.kind = LayerKind::kPool;
    } else if (kind == "concat") {
      l.kind = LayerKind::kConcat;
    } else if (kind == "resadd") {
      l.kind = LayerKind::kResidualAdd;
    } else {
      throw ParseError("unknown layer kind '" + std::string(kind) + "'", line);
    }
    if (tok.size() < 2) throw ParseError("missing layer name", line);
    l.name = std::string(tok[1]);

    std::size_t i = 2;
    for (; i < tok.size() && tok[i] != "from"; ++i) {
      if (!parse_param(l, tok[i])) {
        fail(l, "unexpected token '" + std::string(tok[i]) + "'");
      }
    }
    if (i < tok.size()) {
      std::string joined;
      for (std::size_t j = i + 1; j < tok.size(); ++j) joined += tok[j];
      for (std::string_view name : text::split(joined, ',')) {
        if (name.empty()) fail(l, "empty name in input list");
        l.inputs.emplace_back(name);
      }
      if (l.inputs.empty()) fail(l, "'from' without layer names");
    } else if (l.kind != LayerKind::kInput) {
      fail(l, "missing 'from <layer>'");
    }
    if (l.kind == LayerKind::kPool && l.channels_out != 0) {
      fail(l, "pool layers do not take a channel count");
    }
    layers.push_back(std::move(l));
  }
  if (!has_input) {
    LayerSpec in;
    in.name = "input";
    in.kind = LayerKind::kInput;
    in.channels_out = 3;
    layers.insert(layers.begin(), std::move(in));
  }
  return NetGraph::FromLayers(std::move(layers));
}

NetGraph attach_window(const NetGraph& graph, const std::string& name,
                       int kernel, std::optional<std::string> from) {
  if (!from) {
    const auto sinks = graph.sinks();
    if (sinks.size() != 1) {
      throw InvalidInput("graph has " + std::to_string(sinks.size()) +
                         " output layers; name the one to attach to");
    }
    from = sinks.front();
  }
  std::vector<LayerSpec> layers = graph.layers();
  LayerSpec w;
  w.name = name;
  w.kind = LayerKind::kConv;
  w.kernel = kernel;
  w.stride = 1;
  w.padding = (kernel - 1) / 2;
  w.inputs = {*from};
  layers.push_back(std::move(w));
  return NetGraph::FromLayers(std::move(layers));
}

std::vector<RFInfo> analyze(const NetGraph& graph, long input_w,
                            long input_h) {
  Analysis a = analyze_lenient(graph, input_w, input_h);
  if (!a.stride_conflicts.empty()) {
    const auto& [idx, msg] = a.stride_conflicts.front();
    throw InvariantError("incompatible merge at '" + graph.layers()[idx].name +
                         "': " + msg);
  }
  return std::move(a.info);
}

RFInfo receptive_field(const NetGraph& graph, std::string_view layer,
                       long input_w, long input_h) {
  const std::size_t idx = graph.index_of(layer);
  return analyze(graph, input_w, input_h)[idx];
}

std::vector<Finding> validate_variant(const NetGraph& graph, long input_w,
                                      long input_h) {
  const Analysis a = analyze_lenient(graph, input_w, input_h);
  std::vector<Finding> findings;
  const auto& layers = graph.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const RFInfo& r = a.info[i];
    if (!is_merge(l.kind)) {
      if (r.out_w < 1 || r.out_h < 1) {
        findings.push_back({l.name, false,
                            "output size collapses to " +
                                std::to_string(r.out_w) + "x" +
                                std::to_string(r.out_h),
                            r.channels, r.rf_set});
      }
      continue;
    }
    Finding f{l.name, true, {}, r.channels, r.rf_set};
    std::vector<std::string> problems;
    for (const auto& [idx, msg] : a.stride_conflicts) {
      if (idx == i) problems.push_back(msg);
    }
    const RFInfo& first = a.info[graph.index_of(l.inputs.front())];
    for (const std::string& name : l.inputs) {
      const RFInfo& in = a.info[graph.index_of(name)];
      if (in.out_w != first.out_w || in.out_h != first.out_h) {
        problems.push_back("branch '" + name + "' is " +
                           std::to_string(in.out_w) + "x" +
                           std::to_string(in.out_h) + " but '" +
                           l.inputs.front() + "' is " +
                           std::to_string(first.out_w) + "x" +
                           std::to_string(first.out_h));
      }
      if (l.kind == LayerKind::kResidualAdd && in.channels != first.channels) {
        problems.push_back("branch '" + name + "' has " +
                           std::to_string(in.channels) + " channels but '" +
                           l.inputs.front() + "' has " +
                           std::to_string(first.channels));
      }
    }
    if (problems.empty()) {
      f.message = std::string(to_string(l.kind)) + " ok";
    } else {
      f.ok = false;
      for (std::size_t p = 0; p < problems.size(); ++p) {
        if (p) f.message += "; ";
        f.message += problems[p];
      }
    }
    findings.push_back(std::move(f));
  }
  return findings;
}

}  // namespace scaledet
