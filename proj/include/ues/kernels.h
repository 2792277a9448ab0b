#pragma once
// Dense and sparse vector kernels used by every oracle and solver.
//
// Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2 variant. The active variant is chosen once at startup from the CPU
// feature bits (overridable with UES_ISA=scalar|avx2 or set_isa()).
// Element-wise kernels are bit-identical across variants; reductions differ
// only in summation order.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ues {

using Vec = std::vector<double>;
using ConstSpan = std::span<const double>;
using MutSpan = std::span<double>;

namespace kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
// Throws std::invalid_argument when the CPU or build lacks the variant.
void set_isa(Isa isa);
Isa parse_isa(std::string_view name);

// Function table for one instruction-set variant.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = a * x + b * y
  void (*lincomb)(double a, const double* x, double b, const double* y,
                  double* out, std::size_t n);
  // out_i = sign(x_i) * max(|x_i| - t, 0)
  void (*soft_threshold)(const double* x, double t, double* out,
                         std::size_t n);
  double (*abs_sum)(const double* a, std::size_t n);
  // sum_j val[j] * x[idx[j]]
  double (*sparse_dot)(const std::int32_t* idx, const double* val,
                       const double* x, std::size_t nnz);
};

const KernelTable& table(Isa isa);
const KernelTable& active();

// Convenience wrappers over active(); sizes are checked.
double dot(ConstSpan a, ConstSpan b);
double sum_squares(ConstSpan a);
double squared_distance(ConstSpan a, ConstSpan b);
void axpy(double a, ConstSpan x, MutSpan y);
void lincomb(double a, ConstSpan x, double b, ConstSpan y, MutSpan out);
void soft_threshold(ConstSpan x, double t, MutSpan out);
double abs_sum(ConstSpan a);
double sparse_dot(std::span<const std::int32_t> idx, ConstSpan val,
                  ConstSpan x);

}  // namespace kernels
}  // namespace ues
