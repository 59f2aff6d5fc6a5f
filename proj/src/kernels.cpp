#include "perfhom/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace perfhom::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay_scalar(const double* x, double alpha, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + alpha * y[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void pointwise_mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void csr_spmv_scalar(const int* row_ptr, const int* col_idx, const double* vals,
                     std::size_t n_rows, const double* x, double* y) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    double s = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += vals[k] * x[col_idx[k]];
    y[r] = s;
  }
}

constexpr KernelTable kScalarTable{dot_scalar,   axpy_scalar,          xpay_scalar,
                                   scale_scalar, pointwise_mul_scalar, csr_spmv_scalar};

SimdLevel detect_level() {
  if (const char* env = std::getenv("PERFHOM_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return SimdLevel::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!level_supported(SimdLevel::avx2))
        throw std::runtime_error("PERFHOM_SIMD=avx2 requested but AVX2 is unavailable");
      return SimdLevel::avx2;
    }
    throw std::runtime_error(std::string("unknown PERFHOM_SIMD value: ") + env);
  }
  return level_supported(SimdLevel::avx2) ? SimdLevel::avx2 : SimdLevel::scalar;
}

SimdLevel g_level = detect_level();

}  // namespace

namespace detail {
const KernelTable& scalar_table() { return kScalarTable; }
}

const KernelTable& table(SimdLevel level) {
  if (level == SimdLevel::avx2) {
    const KernelTable* t = detail::avx2_table();
    if (!t) throw std::runtime_error("AVX2 kernels unavailable on this machine");
    return *t;
  }
  return kScalarTable;
}

const KernelTable& active() { return table(g_level); }

SimdLevel active_level() { return g_level; }

void set_active_level(SimdLevel level) {
  table(level);  // throws if unsupported
  g_level = level;
}

bool level_supported(SimdLevel level) {
  if (level == SimdLevel::scalar) return true;
  return detail::avx2_table() != nullptr;
}

const char* level_name(SimdLevel level) {
  return level == SimdLevel::avx2 ? "avx2" : "scalar";
}

}  // namespace perfhom::kernels
