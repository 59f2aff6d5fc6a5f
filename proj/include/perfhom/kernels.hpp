#pragma once

#include <cstddef>
#include <span>

namespace perfhom::kernels {

// Dense inner loops of the solvers. One scalar reference implementation and
// one AVX2 implementation share this table; the active table is chosen once
// at startup from CPUID, or forced via the PERFHOM_SIMD environment variable
// ("scalar" / "avx2") or set_active_level(). SIMD variants may reassociate
// sums, so cross-variant agreement is to rounding, not bitwise; a fixed
// variant is bitwise reproducible run to run.

enum class SimdLevel { scalar = 0, avx2 = 1 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);  // y += alpha x
  void (*xpay)(const double* x, double alpha, double* y, std::size_t n);  // y = x + alpha y
  void (*scale)(double alpha, double* x, std::size_t n);
  void (*pointwise_mul)(const double* a, const double* b, double* out, std::size_t n);
  // y = A x for CSR (row_ptr has n_rows+1 entries)
  void (*csr_spmv)(const int* row_ptr, const int* col_idx, const double* vals,
                   std::size_t n_rows, const double* x, double* y);
};

const KernelTable& table(SimdLevel level);
const KernelTable& active();
SimdLevel active_level();
void set_active_level(SimdLevel level);
bool level_supported(SimdLevel level);
const char* level_name(SimdLevel level);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void xpay(std::span<const double> x, double alpha, std::span<double> y) {
  active().xpay(x.data(), alpha, y.data(), x.size());
}
inline void scale(double alpha, std::span<double> x) {
  active().scale(alpha, x.data(), x.size());
}
inline void pointwise_mul(std::span<const double> a, std::span<const double> b,
                          std::span<double> out) {
  active().pointwise_mul(a.data(), b.data(), out.data(), a.size());
}

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // null when not compiled in or unsupported
}

}  // namespace perfhom::kernels
