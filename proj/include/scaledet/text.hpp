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

// Small text helpers shared by the parsers and report writers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scaledet::text {

std::string_view trim(std::string_view s);

// Splits on `sep`, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char sep);

// Splits on runs of spaces/tabs/CR.
std::vector<std::string_view> split_ws(std::string_view s);

// Whole-token parses; nullopt on trailing garbage or overflow.
std::optional<double> to_double(std::string_view s);
std::optional<long long> to_int(std::string_view s);

// Comma-separated doubles ("32,64,128"); throws ConfigError naming `what`.
std::vector<double> to_double_list(std::string_view s, std::string_view what);

// Shortest representation that parses back to the same double; "inf" for
// infinity.
std::string fmt(double v);

bool iequals(std::string_view a, std::string_view b);

// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0);

}  // namespace scaledet::text
