// evalkit/detail/text.hpp
//
// Copyright 2026  Evalkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EVALKIT_DETAIL_TEXT_HPP_
#define EVALKIT_DETAIL_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace evalkit {
namespace detail {

inline bool IsFieldSep(char c) { return c == ' ' || c == '\t'; }

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && (IsFieldSep(s.front()) || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (IsFieldSep(s.back()) || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline bool IsBlank(std::string_view s) { return Trim(s).empty(); }

// Splits on runs of ASCII spaces/tabs.  Input files are accepted liberally;
// writers always emit the canonical single separator.
inline std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsFieldSep(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !IsFieldSep(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

struct TextLine {
  std::string_view text;  // without the newline; trailing '\r' stripped
  int number = 0;         // 1-based
};

// Splits into physical lines.  Accepts LF and CRLF; a trailing newline does
// not produce an extra empty line.
inline std::vector<TextLine> SplitLines(std::string_view text) {
  std::vector<TextLine> lines;
  int number = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    if (pos == text.size()) {
      if (pos != 0)  // text ends without newline: last line already emitted
        break;
      break;
    }
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = (nl == std::string_view::npos)
                               ? text.substr(pos)
                               : text.substr(pos, nl - pos);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    lines.push_back({raw, number});
    ++number;
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

// Canonical single-space rendering of a field list, used for header
// comparison so tab-separated and space-separated headers compare equal.
inline std::string NormalizeSpacing(std::string_view line) {
  std::string out;
  for (auto f : SplitFields(line)) {
    if (!out.empty()) out += ' ';
    out.append(f);
  }
  return out;
}

inline bool ContainsWhitespace(std::string_view s) {
  for (char c : s)
    if (IsFieldSep(c) || c == '\r' || c == '\n') return true;
  return false;
}

}  // namespace detail
}  // namespace evalkit

#endif  // EVALKIT_DETAIL_TEXT_HPP_
