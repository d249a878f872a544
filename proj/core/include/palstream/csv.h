// Copyright 2026 The palstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PALSTREAM_CSV_H_
#define PALSTREAM_CSV_H_

#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

// Minimal reader for the flat numeric CSV files the toolkit exchanges. No
// quoting; '#' lines are comments.
namespace palstream::csv {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view line, char sep = ',');

struct Document {
  std::vector<std::string> comments;  // text after '#', trimmed
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based, parallel to rows
};

// Requires the first non-comment line to equal expected_header exactly.
// Throws FormatError naming the line on any shape mismatch.
Document parse(std::string_view text,
               std::initializer_list<std::string_view> expected_header);

// Throws FormatError mentioning what and line.
double parse_double(std::string_view field, std::string_view what,
                    std::size_t line = 0);
long long parse_int(std::string_view field, std::string_view what,
                    std::size_t line = 0);

// Shortest text that round-trips the double; "inf" / "-inf" / "nan" spelled
// out.
std::string format_double(double v);

}  // namespace palstream::csv

#endif  // PALSTREAM_CSV_H_
