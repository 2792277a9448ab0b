#pragma once
// LIBSVM-format datasets stored as a CSR design matrix plus labels.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ues/kernels.h"

namespace ues {

struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> col_idx;
  Vec values;

  std::size_t nnz() const { return values.size(); }
  std::span<const std::int32_t> row_indices(std::size_t i) const;
  ConstSpan row_values(std::size_t i) const;

  // out = A x
  void multiply(ConstSpan x, MutSpan out) const;
  CsrMatrix transpose() const;

  static CsrMatrix from_dense(const std::vector<Vec>& dense_rows,
                              std::size_t cols);
  // Throws std::invalid_argument if the structure is inconsistent.
  void validate() const;
};

struct SparseDataset {
  CsrMatrix a;
  Vec labels;

  std::size_t rows() const { return a.rows; }
  std::size_t cols() const { return a.cols; }
  bool empty() const { return a.rows == 0; }

  static SparseDataset from_dense(const std::vector<Vec>& dense_rows,
                                  Vec labels);
};

bool operator==(const CsrMatrix& lhs, const CsrMatrix& rhs);
bool operator==(const SparseDataset& lhs, const SparseDataset& rhs);

struct ParseOptions {
  // Pins the column count; must be >= the largest index in the file.
  std::optional<std::size_t> dim_override;
  // Map {0,1}, {1,2} or {-1,+1} labels onto {-1,+1}. Disable for
  // regression targets.
  bool normalize_labels = true;
};

// Throws ParseError (with 1-based line number) on malformed input.
SparseDataset parse_libsvm(std::istream& in, const ParseOptions& opts = {});
SparseDataset parse_libsvm(const std::string& text,
                           const ParseOptions& opts = {});
// Reads a file; names ending in ".gz" are decompressed. I/O failures throw
// std::runtime_error.
SparseDataset load_libsvm(const std::string& path,
                          const ParseOptions& opts = {});

void write_libsvm(std::ostream& out, const SparseDataset& data);
std::string to_libsvm(const SparseDataset& data);

}  // namespace ues
