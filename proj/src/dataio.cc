#include "ues/dataio.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "ues/errors.h"

namespace ues {

std::span<const std::int32_t> CsrMatrix::row_indices(std::size_t i) const {
  const auto b = static_cast<std::size_t>(row_ptr[i]);
  const auto e = static_cast<std::size_t>(row_ptr[i + 1]);
  return {col_idx.data() + b, e - b};
}

ConstSpan CsrMatrix::row_values(std::size_t i) const {
  const auto b = static_cast<std::size_t>(row_ptr[i]);
  const auto e = static_cast<std::size_t>(row_ptr[i + 1]);
  return {values.data() + b, e - b};
}

void CsrMatrix::multiply(ConstSpan x, MutSpan out) const {
  require_same_dim(x.size(), cols, "CsrMatrix::multiply");
  require_same_dim(out.size(), rows, "CsrMatrix::multiply");
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < rows; ++i) {
    const auto b = static_cast<std::size_t>(row_ptr[i]);
    const auto e = static_cast<std::size_t>(row_ptr[i + 1]);
    out[i] = k.sparse_dot(col_idx.data() + b, values.data() + b, x.data(),
                          e - b);
  }
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (const auto c : col_idx) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
  for (std::size_t j = 0; j < cols; ++j) t.row_ptr[j + 1] += t.row_ptr[j];
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  std::vector<std::int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Row-major sweep keeps the transposed column indices sorted.
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      const auto c = static_cast<std::size_t>(col_idx[p]);
      const auto dst = next[c]++;
      t.col_idx[dst] = static_cast<std::int32_t>(i);
      t.values[dst] = values[p];
    }
  }
  return t;
}

CsrMatrix CsrMatrix::from_dense(const std::vector<Vec>& dense_rows,
                                std::size_t cols) {
  CsrMatrix m;
  m.rows = dense_rows.size();
  m.cols = cols;
  for (const auto& r : dense_rows) {
    require_same_dim(r.size(), cols, "CsrMatrix::from_dense");
    for (std::size_t j = 0; j < cols; ++j) {
      if (r[j] != 0.0) {
        m.col_idx.push_back(static_cast<std::int32_t>(j));
        m.values.push_back(r[j]);
      }
    }
    m.row_ptr.push_back(static_cast<std::int64_t>(m.values.size()));
  }
  return m;
}

void CsrMatrix::validate() const {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 ||
      static_cast<std::size_t>(row_ptr.back()) != values.size() ||
      col_idx.size() != values.size()) {
    throw std::invalid_argument("CsrMatrix: inconsistent storage");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (row_ptr[i + 1] < row_ptr[i]) {
      throw std::invalid_argument("CsrMatrix: row_ptr not monotone");
    }
    const auto idx = row_indices(i);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (idx[j] < 0 || static_cast<std::size_t>(idx[j]) >= cols ||
          (j > 0 && idx[j] <= idx[j - 1])) {
        throw std::invalid_argument("CsrMatrix: bad column index in row " +
                                    std::to_string(i));
      }
    }
  }
}

SparseDataset SparseDataset::from_dense(const std::vector<Vec>& dense_rows,
                                        Vec labels) {
  require_same_dim(dense_rows.size(), labels.size(), "SparseDataset");
  const std::size_t cols = dense_rows.empty() ? 0 : dense_rows.front().size();
  return {CsrMatrix::from_dense(dense_rows, cols), std::move(labels)};
}

bool operator==(const CsrMatrix& lhs, const CsrMatrix& rhs) {
  return lhs.rows == rhs.rows && lhs.cols == rhs.cols &&
         lhs.row_ptr == rhs.row_ptr && lhs.col_idx == rhs.col_idx &&
         lhs.values == rhs.values;
}

bool operator==(const SparseDataset& lhs, const SparseDataset& rhs) {
  return lhs.a == rhs.a && lhs.labels == rhs.labels;
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::string_view next_token(std::string_view& rest) {
  std::size_t b = 0;
  while (b < rest.size() && is_space(rest[b])) ++b;
  std::size_t e = b;
  while (e < rest.size() && !is_space(rest[e])) ++e;
  const std::string_view tok = rest.substr(b, e - b);
  rest.remove_prefix(e);
  return tok;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_index(std::string_view s, long long& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void normalize_labels(Vec& labels, const std::vector<std::size_t>& lines) {
  std::set<double> seen(labels.begin(), labels.end());
  auto within = [&](std::initializer_list<double> allowed) {
    return std::all_of(seen.begin(), seen.end(), [&](double v) {
      return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
    });
  };
  double negative = 0.0;
  if (within({-1.0, 1.0})) {
    return;
  } else if (within({0.0, 1.0})) {
    negative = 0.0;
  } else if (within({1.0, 2.0})) {
    negative = 1.0;
  } else {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != -1.0 && labels[i] != 0.0 && labels[i] != 1.0 &&
          labels[i] != 2.0) {
        throw ParseError(lines[i], "label is not binary");
      }
    }
    throw ParseError(lines.empty() ? 0 : lines.back(),
                     "labels mix incompatible binary encodings");
  }
  for (auto& y : labels) y = (y == negative) ? -1.0 : 1.0;
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, const ParseOptions& opts) {
  SparseDataset data;
  CsrMatrix& a = data.a;
  std::vector<std::size_t> label_lines;
  std::vector<std::pair<std::int32_t, double>> entries;
  std::size_t max_col = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
      rest = rest.substr(0, hash);
    }
    const std::string_view label_tok = next_token(rest);
    if (label_tok.empty()) continue;
    double label = 0.0;
    if (!parse_double(label_tok, label)) {
      throw ParseError(line_no, "unparsable label '" + std::string(label_tok) +
                                    "'");
    }
    entries.clear();
    for (auto tok = next_token(rest); !tok.empty(); tok = next_token(rest)) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "malformed token '" + std::string(tok) + "'");
      }
      long long index = 0;
      double value = 0.0;
      if (!parse_index(tok.substr(0, colon), index) ||
          !parse_double(tok.substr(colon + 1), value)) {
        throw ParseError(line_no, "malformed token '" + std::string(tok) + "'");
      }
      if (index <= 0) {
        throw ParseError(line_no, "nonpositive feature index " +
                                      std::to_string(index));
      }
      if (index > std::numeric_limits<std::int32_t>::max()) {
        throw ParseError(line_no, "feature index too large");
      }
      entries.emplace_back(static_cast<std::int32_t>(index - 1), value);
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    for (std::size_t j = 1; j < entries.size(); ++j) {
      if (entries[j].first == entries[j - 1].first) {
        throw ParseError(line_no, "duplicate feature index " +
                                      std::to_string(entries[j].first + 1));
      }
    }
    for (const auto& [c, v] : entries) {
      a.col_idx.push_back(c);
      a.values.push_back(v);
      max_col = std::max(max_col, static_cast<std::size_t>(c) + 1);
    }
    a.row_ptr.push_back(static_cast<std::int64_t>(a.values.size()));
    data.labels.push_back(label);
    label_lines.push_back(line_no);
  }
  if (in.bad()) throw std::runtime_error("read error while parsing LIBSVM");
  a.rows = data.labels.size();
  a.cols = max_col;
  if (opts.dim_override) {
    if (*opts.dim_override < max_col) {
      throw std::invalid_argument(
          "dimension override " + std::to_string(*opts.dim_override) +
          " is smaller than the largest feature index " +
          std::to_string(max_col));
    }
    a.cols = *opts.dim_override;
  }
  if (opts.normalize_labels) normalize_labels(data.labels, label_lines);
  return data;
}

SparseDataset parse_libsvm(const std::string& text, const ParseOptions& opts) {
  std::istringstream in(text);
  return parse_libsvm(in, opts);
}

namespace {

std::string read_gzip(const std::string& path) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> gz(gzopen(path.c_str(), "rb"),
                                                   &gzclose);
  if (!gz) throw std::runtime_error("cannot open " + path);
  std::string out;
  char buf[1 << 16];
  for (;;) {
    const int n = gzread(gz.get(), buf, sizeof(buf));
    if (n < 0) throw std::runtime_error("gzip read error in " + path);
    if (n == 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace

SparseDataset load_libsvm(const std::string& path, const ParseOptions& opts) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    return parse_libsvm(read_gzip(path), opts);
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_libsvm(in, opts);
}

void write_libsvm(std::ostream& out, const SparseDataset& data) {
  char buf[64];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", data.labels[i]);
    out << buf;
    const auto idx = data.a.row_indices(i);
    const auto val = data.a.row_values(i);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      std::snprintf(buf, sizeof(buf), " %d:%.17g", idx[j] + 1, val[j]);
      out << buf;
    }
    out << '\n';
  }
}

std::string to_libsvm(const SparseDataset& data) {
  std::ostringstream out;
  write_libsvm(out, data);
  return out.str();
}

}  // namespace ues
