// Copyright 2026 The CDS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small text helpers shared by the delimited-file readers and writers.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cds::text
{

/// Shortest decimal form that parses back to the same double.
std::string format_real(double value);

/// Strict parse of a whole field as a double; nullopt on any trailing junk.
std::optional<double> parse_real(std::string_view field);

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view line, char delimiter);

std::string join(const std::vector<std::string> & fields, char delimiter);

}  // namespace cds::text
