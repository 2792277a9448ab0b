#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.h"
#include "ues/errors.h"

namespace ues::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(UES_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("UES_ISA")) {
    const Isa wanted = parse_isa(env);
    if (isa_supported(wanted)) return wanted;
  }
  return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> tbl{&table(initial_isa())};
  return tbl;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa) {
  return isa == Isa::kScalar || cpu_has_avx2();
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  throw std::invalid_argument("unknown kernel ISA '" + std::string(name) + "'");
}

const KernelTable& table(Isa isa) {
#ifdef UES_HAVE_AVX2_KERNELS
  if (isa == Isa::kAvx2) {
    if (!cpu_has_avx2()) throw std::invalid_argument("AVX2 not supported");
    return avx2::kTable;
  }
#else
  if (isa == Isa::kAvx2) throw std::invalid_argument("built without AVX2");
#endif
  return scalar::kTable;
}

Isa active_isa() {
  return current().load() == &scalar::kTable ? Isa::kScalar : Isa::kAvx2;
}

void set_isa(Isa isa) { current().store(&table(isa)); }

const KernelTable& active() { return *current().load(); }

double dot(ConstSpan a, ConstSpan b) {
  require_same_dim(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

double sum_squares(ConstSpan a) {
  return active().sum_squares(a.data(), a.size());
}

double squared_distance(ConstSpan a, ConstSpan b) {
  require_same_dim(a.size(), b.size(), "squared_distance");
  return active().squared_distance(a.data(), b.data(), a.size());
}

void axpy(double a, ConstSpan x, MutSpan y) {
  require_same_dim(x.size(), y.size(), "axpy");
  active().axpy(a, x.data(), y.data(), x.size());
}

void lincomb(double a, ConstSpan x, double b, ConstSpan y, MutSpan out) {
  require_same_dim(x.size(), y.size(), "lincomb");
  require_same_dim(x.size(), out.size(), "lincomb");
  active().lincomb(a, x.data(), b, y.data(), out.data(), x.size());
}

void soft_threshold(ConstSpan x, double t, MutSpan out) {
  require_same_dim(x.size(), out.size(), "soft_threshold");
  active().soft_threshold(x.data(), t, out.data(), x.size());
}

double abs_sum(ConstSpan a) { return active().abs_sum(a.data(), a.size()); }

double sparse_dot(std::span<const std::int32_t> idx, ConstSpan val,
                  ConstSpan x) {
  require_same_dim(idx.size(), val.size(), "sparse_dot");
  return active().sparse_dot(idx.data(), val.data(), x.data(), idx.size());
}

}  // namespace ues::kernels
