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

#include "palstream/csv.h"

#include <charconv>
#include <cmath>

#include <fmt/core.h>
#include <fmt/format.h>

#include "palstream/error.h"

namespace palstream::csv {

std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n";
  auto begin = s.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(kSpace);
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

namespace {

std::string where(std::size_t line) {
  return line == 0 ? std::string() : fmt::format(" on line {}", line);
}

}  // namespace

Document parse(std::string_view text,
               std::initializer_list<std::string_view> expected_header) {
  Document doc;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      doc.comments.emplace_back(trim(line.substr(1)));
    } else {
      auto fields = split(line);
      if (!have_header) {
        if (!std::equal(fields.begin(), fields.end(), expected_header.begin(),
                        expected_header.end())) {
          throw FormatError(fmt::format("unexpected CSV header '{}'{}, expected "
                                        "'{}'",
                                        line, where(line_no),
                                        fmt::join(expected_header, ",")));
        }
        have_header = true;
      } else {
        if (fields.size() != expected_header.size()) {
          throw FormatError(fmt::format("expected {} fields, got {}{}",
                                        expected_header.size(), fields.size(),
                                        where(line_no)));
        }
        doc.rows.emplace_back(fields.begin(), fields.end());
        doc.line_numbers.push_back(line_no);
      }
    }
    if (end == text.size()) break;
  }
  if (!have_header) {
    throw FormatError(fmt::format("missing CSV header '{}'",
                                  fmt::join(expected_header, ",")));
  }
  return doc;
}

double parse_double(std::string_view field, std::string_view what,
                    std::size_t line) {
  field = trim(field);
  double value = 0.0;
  auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() ||
      end != field.data() + field.size() || !std::isfinite(value)) {
    throw FormatError(
        fmt::format("{} '{}' is not a finite number{}", what, field, where(line)));
  }
  return value;
}

long long parse_int(std::string_view field, std::string_view what,
                    std::size_t line) {
  field = trim(field);
  long long value = 0;
  auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() ||
      end != field.data() + field.size()) {
    throw FormatError(
        fmt::format("{} '{}' is not an integer{}", what, field, where(line)));
  }
  return value;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

}  // namespace palstream::csv
