#include <doctest.h>

#include <random>
#include <vector>

#include "perfhom/fem.hpp"
#include "perfhom/kernels.hpp"

using namespace perfhom;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = uni(rng);
  return v;
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 64, 67, 256, 1001};

}  // namespace

TEST_CASE("scalar and simd kernel variants agree to rounding") {
  if (!kernels::level_supported(kernels::SimdLevel::avx2)) {
    MESSAGE("AVX2 unavailable; scalar-only machine");
    return;
  }
  const auto& sc = kernels::table(kernels::SimdLevel::scalar);
  const auto& vx = kernels::table(kernels::SimdLevel::avx2);
  std::mt19937 rng(20240811);

  for (std::size_t n : kSizes) {
    auto a = random_vec(n, rng);
    auto b = random_vec(n, rng);

    const double d0 = sc.dot(a.data(), b.data(), n);
    const double d1 = vx.dot(a.data(), b.data(), n);
    CHECK(std::abs(d0 - d1) <= 1e-13 * (1.0 + std::abs(d0)));

    auto y0 = b, y1 = b;
    sc.axpy(0.7, a.data(), y0.data(), n);
    vx.axpy(0.7, a.data(), y1.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y0[i] == doctest::Approx(y1[i]).epsilon(1e-14));

    y0 = b;
    y1 = b;
    sc.xpay(a.data(), -1.3, y0.data(), n);
    vx.xpay(a.data(), -1.3, y1.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y0[i] == doctest::Approx(y1[i]).epsilon(1e-14));

    y0 = a;
    y1 = a;
    sc.scale(0.25, y0.data(), n);
    vx.scale(0.25, y1.data(), n);
    CHECK(y0 == y1);  // single multiply per entry, bitwise equal

    std::vector<double> z0(n), z1(n);
    sc.pointwise_mul(a.data(), b.data(), z0.data(), n);
    vx.pointwise_mul(a.data(), b.data(), z1.data(), n);
    CHECK(z0 == z1);
  }
}

TEST_CASE("csr spmv variants agree on an assembled operator") {
  const TriMesh mesh = triangulate_rect({0, 0, 1, 1}, 1.0 / 12);
  const DofMap dofs = build_dofmap(mesh, BoundaryTag::outer);
  const SparseMatrix a = assemble_stiffness(mesh, dofs);
  std::mt19937 rng(7);
  const auto x = random_vec(static_cast<std::size_t>(a.n), rng);

  std::vector<double> y0(x.size()), y1(x.size());
  kernels::detail::scalar_table().csr_spmv(a.row_ptr.data(), a.col_idx.data(), a.vals.data(),
                                           x.size(), x.data(), y0.data());
  if (!kernels::level_supported(kernels::SimdLevel::avx2)) return;
  kernels::table(kernels::SimdLevel::avx2)
      .csr_spmv(a.row_ptr.data(), a.col_idx.data(), a.vals.data(), x.size(), x.data(), y1.data());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::abs(y0[i] - y1[i]) <= 1e-13 * (1.0 + std::abs(y0[i])));
}

TEST_CASE("kernel dispatch is fixed within a run and repeatable") {
  const auto level = kernels::active_level();
  std::mt19937 rng(99);
  const auto a = random_vec(1000, rng);
  const auto b = random_vec(1000, rng);
  const double d1 = kernels::dot(a, b);
  const double d2 = kernels::dot(a, b);
  CHECK(d1 == d2);
  CHECK(kernels::active_level() == level);
}

TEST_CASE("axpy with zero coefficient is the identity") {
  std::mt19937 rng(3);
  auto a = random_vec(129, rng);
  auto y = random_vec(129, rng);
  const auto y_before = y;
  kernels::axpy(0.0, a, y);
  CHECK(y == y_before);
}
