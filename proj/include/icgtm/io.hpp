#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "icgtm/types.hpp"

// Plain-text exchange formats.
//
// Correspondence file:
//   MCORR 1 <count> <desc_dim> <wL> <hL> <wR> <hR>
// then per correspondence three lines:
//   idx xL yL a11 a12 a21 a22 xR yR b11 b12 b21 b22 ratio gt_label
//   <desc_dim left descriptor values>
//   <desc_dim right descriptor values>
// gt_label: -1 outlier, -2 unknown, else consistency id.
//
// Result file:
//   MRES 1 <count> <K>
// then K homography lines (9 numbers, row-major), then <count> "idx label"
// lines.
//
// Numbers are written with std::to_chars (shortest round-trip form), so a
// save/load cycle reproduces every float bit-exactly.

namespace icgtm {
namespace detail {

inline void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline void append_number(std::string& out, long long v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline void append_number(std::string& out, int v) {
  append_number(out, static_cast<long long>(v));
}

// Whitespace-separated token scanner over one line.
class LineTokens {
 public:
  LineTokens(std::string_view line, int line_no)
      : line_(line), line_no_(line_no) {}

  bool next(std::string_view& token) {
    while (pos_ < line_.size() && is_space(line_[pos_])) ++pos_;
    if (pos_ >= line_.size()) return false;
    const std::size_t start = pos_;
    while (pos_ < line_.size() && !is_space(line_[pos_])) ++pos_;
    token = line_.substr(start, pos_ - start);
    return true;
  }

  double next_double(const char* what) {
    std::string_view token = require(what);
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
      fail(std::string("bad ") + what + " '" + std::string(token) + "'");
    return v;
  }

  long long next_int(const char* what) {
    std::string_view token = require(what);
    long long v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
      fail(std::string("bad ") + what + " '" + std::string(token) + "'");
    return v;
  }

  void expect_end() {
    std::string_view token;
    if (next(token))
      fail("unexpected trailing token '" + std::string(token) + "'");
  }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r';
  }

  std::string_view require(const char* what) {
    std::string_view token;
    if (!next(token)) fail(std::string("missing ") + what);
    return token;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw io_error("line " + std::to_string(line_no_) + ": " + msg);
  }

  std::string_view line_;
  int line_no_;
  std::size_t pos_ = 0;
};

// Reads a whole file and splits it into lines; blank trailing lines are
// dropped, interior blank lines are errors at the call sites that care.
inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace detail

inline void save_correspondences(const CorrespondenceSet& set,
                                 const std::string& path) {
  validate(set);
  const std::size_t dim = set.items.empty() ? 0 : set.items[0].left_desc.size();
  std::string out;
  out.reserve(64 + set.items.size() * (220 + dim * 40));
  out += "MCORR 1 ";
  detail::append_number(out, set.size());
  out += ' ';
  detail::append_number(out, static_cast<long long>(dim));
  out += ' ';
  detail::append_number(out, set.left_size.width);
  out += ' ';
  detail::append_number(out, set.left_size.height);
  out += ' ';
  detail::append_number(out, set.right_size.width);
  out += ' ';
  detail::append_number(out, set.right_size.height);
  out += '\n';
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const Correspondence& c = set.items[i];
    detail::append_number(out, c.index);
    for (double v : {c.left.position.x(), c.left.position.y(),
                     c.left.affine(0, 0), c.left.affine(0, 1),
                     c.left.affine(1, 0), c.left.affine(1, 1),
                     c.right.position.x(), c.right.position.y(),
                     c.right.affine(0, 0), c.right.affine(0, 1),
                     c.right.affine(1, 0), c.right.affine(1, 1)}) {
      out += ' ';
      detail::append_number(out, v);
    }
    out += ' ';
    detail::append_number(out, c.has_ratio() ? c.ratio : -1.0);
    out += ' ';
    detail::append_number(out,
                          set.ground_truth.empty() ? kUnlabeled : set.ground_truth[i]);
    out += '\n';
    for (const Descriptor* d : {&c.left_desc, &c.right_desc}) {
      for (std::size_t v = 0; v < d->values.size(); ++v) {
        if (v) out += ' ';
        detail::append_number(out, d->values[v]);
      }
      out += '\n';
    }
  }
  detail::write_file(path, out);
}

inline CorrespondenceSet load_correspondences(const std::string& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  if (lines.empty()) throw io_error("'" + path + "' is empty");

  detail::LineTokens header(lines[0], 1);
  std::string_view magic;
  if (!header.next(magic) || magic != "MCORR")
    throw io_error("'" + path + "' is not a correspondence file");
  const long long version = header.next_int("format version");
  if (version != 1)
    throw io_error("unsupported correspondence format version " +
                   std::to_string(version));
  const long long count = header.next_int("correspondence count");
  const long long dim = header.next_int("descriptor dimension");
  if (count < 0 || dim < 0) throw io_error("negative count in header");

  CorrespondenceSet set;
  set.left_size.width = static_cast<int>(header.next_int("left width"));
  set.left_size.height = static_cast<int>(header.next_int("left height"));
  set.right_size.width = static_cast<int>(header.next_int("right width"));
  set.right_size.height = static_cast<int>(header.next_int("right height"));
  header.expect_end();

  const std::size_t expected_lines = 1 + 3 * static_cast<std::size_t>(count);
  if (lines.size() != expected_lines)
    throw io_error("'" + path + "' declares " + std::to_string(count) +
                   " correspondences but holds " +
                   std::to_string((lines.size() - 1) / 3) + " records");

  set.items.reserve(static_cast<std::size_t>(count));
  set.ground_truth.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    const int base = static_cast<int>(1 + 3 * i);
    detail::LineTokens rec(lines[static_cast<std::size_t>(base)], base + 1);
    Correspondence c;
    c.index = static_cast<int>(rec.next_int("correspondence id"));
    c.left.position.x() = rec.next_double("left x");
    c.left.position.y() = rec.next_double("left y");
    c.left.affine(0, 0) = rec.next_double("left affine a11");
    c.left.affine(0, 1) = rec.next_double("left affine a12");
    c.left.affine(1, 0) = rec.next_double("left affine a21");
    c.left.affine(1, 1) = rec.next_double("left affine a22");
    c.right.position.x() = rec.next_double("right x");
    c.right.position.y() = rec.next_double("right y");
    c.right.affine(0, 0) = rec.next_double("right affine b11");
    c.right.affine(0, 1) = rec.next_double("right affine b12");
    c.right.affine(1, 0) = rec.next_double("right affine b21");
    c.right.affine(1, 1) = rec.next_double("right affine b22");
    c.ratio = rec.next_double("ratio");
    if (c.ratio < 0.0) c.ratio = -1.0;
    const long long gt = rec.next_int("ground-truth label");
    rec.expect_end();

    for (int side = 0; side < 2; ++side) {
      detail::LineTokens desc(lines[static_cast<std::size_t>(base + 1 + side)],
                              base + 2 + side);
      Descriptor& d = side == 0 ? c.left_desc : c.right_desc;
      d.values.resize(static_cast<std::size_t>(dim));
      for (long long v = 0; v < dim; ++v)
        d.values[static_cast<std::size_t>(v)] = desc.next_double("descriptor value");
      desc.expect_end();
    }

    set.items.push_back(std::move(c));
    set.ground_truth.push_back(static_cast<int>(gt));
  }

  validate(set);
  return set;
}

inline void save_result(const MatchResult& result, const std::string& path) {
  validate(result);
  std::string out;
  out.reserve(64 + result.homographies.size() * 200 + result.indices.size() * 16);
  out += "MRES 1 ";
  detail::append_number(out, static_cast<long long>(result.indices.size()));
  out += ' ';
  detail::append_number(out, static_cast<long long>(result.homographies.size()));
  out += '\n';
  for (const Homography& hom : result.homographies) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        if (r || c) out += ' ';
        detail::append_number(out, hom.h(r, c));
      }
    out += '\n';
  }
  for (std::size_t i = 0; i < result.indices.size(); ++i) {
    detail::append_number(out, result.indices[i]);
    out += ' ';
    detail::append_number(out, result.labels[i]);
    out += '\n';
  }
  detail::write_file(path, out);
}

inline MatchResult load_result(const std::string& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  if (lines.empty()) throw io_error("'" + path + "' is empty");

  detail::LineTokens header(lines[0], 1);
  std::string_view magic;
  if (!header.next(magic) || magic != "MRES")
    throw io_error("'" + path + "' is not a result file");
  const long long version = header.next_int("format version");
  if (version != 1)
    throw io_error("unsupported result format version " + std::to_string(version));
  const long long count = header.next_int("label count");
  const long long k = header.next_int("cluster count");
  if (count < 0 || k < 0) throw io_error("negative count in header");
  header.expect_end();

  const std::size_t expected =
      1 + static_cast<std::size_t>(k) + static_cast<std::size_t>(count);
  if (lines.size() != expected)
    throw io_error("'" + path + "' has " + std::to_string(lines.size()) +
                   " lines, expected " + std::to_string(expected));

  MatchResult result;
  result.homographies.reserve(static_cast<std::size_t>(k));
  for (long long i = 0; i < k; ++i) {
    detail::LineTokens row(lines[static_cast<std::size_t>(1 + i)],
                           static_cast<int>(2 + i));
    Homography hom;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) hom.h(r, c) = row.next_double("homography entry");
    row.expect_end();
    result.homographies.push_back(hom);
  }
  result.indices.reserve(static_cast<std::size_t>(count));
  result.labels.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    const std::size_t line_idx = static_cast<std::size_t>(1 + k + i);
    detail::LineTokens row(lines[line_idx], static_cast<int>(line_idx + 1));
    result.indices.push_back(static_cast<int>(row.next_int("correspondence id")));
    result.labels.push_back(static_cast<int>(row.next_int("label")));
    row.expect_end();
  }

  validate(result);
  return result;
}

}  // namespace icgtm
