#include "perfhom/fem.hpp"

#include <algorithm>
#include <cmath>

#include "perfhom/kernels.hpp"

namespace perfhom {

void SparseMatrix::mul(std::span<const double> x, std::span<double> y) const {
  kernels::active().csr_spmv(row_ptr.data(), col_idx.data(), vals.data(),
                             static_cast<std::size_t>(n), x.data(), y.data());
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < n; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      if (col_idx[k] == r) d[static_cast<std::size_t>(r)] = vals[k];
  return d;
}

double SparseMatrix::quadratic_form(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(n));
  mul(x, y);
  return kernels::dot(x, y);
}

bool SparseMatrix::exactly_symmetric() const {
  for (int r = 0; r < n; ++r) {
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const int c = col_idx[k];
      bool found = false;
      for (int k2 = row_ptr[c]; k2 < row_ptr[c + 1]; ++k2) {
        if (col_idx[k2] == r) {
          if (vals[k2] != vals[k]) return false;
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }
  return true;
}

SparseMatrix CsrBuilder::build() const {
  std::vector<Triplet> t = triplets_;
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  SparseMatrix m;
  m.n = n_;
  m.row_ptr.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (std::size_t k = 0; k < t.size();) {
    std::size_t k2 = k;
    double sum = 0.0;
    while (k2 < t.size() && t[k2].i == t[k].i && t[k2].j == t[k].j) sum += t[k2++].v;
    m.col_idx.push_back(t[k].j);
    m.vals.push_back(sum);
    ++m.row_ptr[static_cast<std::size_t>(t[k].i) + 1];
    k = k2;
  }
  for (int r = 0; r < n_; ++r) m.row_ptr[static_cast<std::size_t>(r) + 1] += m.row_ptr[static_cast<std::size_t>(r)];
  return m;
}

SparseMatrix csr_lincomb(const std::vector<std::pair<double, const SparseMatrix*>>& terms) {
  if (terms.empty()) throw NumericalError("csr_lincomb needs at least one term");
  const int n = terms.front().second->n;
  CsrBuilder b(n);
  for (const auto& [coef, mat] : terms) {
    if (mat->n != n) throw NumericalError("csr_lincomb dimension mismatch");
    for (int r = 0; r < n; ++r)
      for (int k = mat->row_ptr[r]; k < mat->row_ptr[r + 1]; ++k)
        b.add(r, mat->col_idx[k], coef * mat->vals[k]);
  }
  return b.build();
}

namespace {

struct P1Gradients {
  double area;
  Vec2 g[3];
};

P1Gradients p1_gradients(const TriMesh& mesh, const std::array<int, 3>& tr) {
  const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
  const double twice = cross(b - a, c - a);
  if (twice <= 0.0) throw NumericalError("degenerate triangle in assembly");
  P1Gradients out;
  out.area = 0.5 * twice;
  out.g[0] = {(b.y - c.y) / twice, (c.x - b.x) / twice};
  out.g[1] = {(c.y - a.y) / twice, (a.x - c.x) / twice};
  out.g[2] = {(a.y - b.y) / twice, (b.x - a.x) / twice};
  return out;
}

}  // namespace

SparseMatrix assemble_stiffness(const TriMesh& mesh, const DofMap& dofs) {
  CsrBuilder b(dofs.n_dofs);
  for (const auto& tr : mesh.triangles) {
    const P1Gradients gr = p1_gradients(mesh, tr);
    for (int i = 0; i < 3; ++i) {
      const int di = dofs.vertex_to_dof[tr[i]];
      if (di < 0) continue;
      for (int j = i; j < 3; ++j) {
        const int dj = dofs.vertex_to_dof[tr[j]];
        if (dj < 0) continue;
        const double v = gr.area * dot(gr.g[i], gr.g[j]);
        if (di == dj && i != j) {
          // periodic identification can fold two local vertices onto one dof
          b.add(di, dj, 2.0 * v);
        } else {
          b.add_symmetric(di, dj, v);
        }
      }
    }
  }
  return b.build();
}

SparseMatrix assemble_stiffness_q(const TriMesh& mesh, const DofMap& dofs, const Mat2& q) {
  const double s11 = q.a11, s22 = q.a22, s12 = 0.5 * (q.a12 + q.a21);
  CsrBuilder b(dofs.n_dofs);
  for (const auto& tr : mesh.triangles) {
    const P1Gradients gr = p1_gradients(mesh, tr);
    for (int i = 0; i < 3; ++i) {
      const int di = dofs.vertex_to_dof[tr[i]];
      if (di < 0) continue;
      for (int j = i; j < 3; ++j) {
        const int dj = dofs.vertex_to_dof[tr[j]];
        if (dj < 0) continue;
        const Vec2 gi = gr.g[i], gj = gr.g[j];
        const double v = gr.area * (s11 * gi.x * gj.x + s22 * gi.y * gj.y +
                                    s12 * (gi.x * gj.y + gi.y * gj.x));
        if (di == dj && i != j) {
          b.add(di, dj, 2.0 * v);
        } else {
          b.add_symmetric(di, dj, v);
        }
      }
    }
  }
  return b.build();
}

SparseMatrix assemble_mass(const TriMesh& mesh, const DofMap& dofs) {
  CsrBuilder b(dofs.n_dofs);
  for (const auto& tr : mesh.triangles) {
    const P1Gradients gr = p1_gradients(mesh, tr);
    const double s = gr.area / 12.0;
    for (int i = 0; i < 3; ++i) {
      const int di = dofs.vertex_to_dof[tr[i]];
      if (di < 0) continue;
      for (int j = i; j < 3; ++j) {
        const int dj = dofs.vertex_to_dof[tr[j]];
        if (dj < 0) continue;
        const double v = (i == j) ? 2.0 * s : s;
        if (di == dj && i != j) {
          b.add(di, dj, 2.0 * v);
        } else {
          b.add_symmetric(di, dj, v);
        }
      }
    }
  }
  return b.build();
}

SparseMatrix assemble_boundary_mass(const TriMesh& mesh, const DofMap& dofs, BoundaryTag tag,
                                    double weight) {
  CsrBuilder b(dofs.n_dofs);
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag != tag) continue;
    const double len = norm(mesh.vertices[e.b] - mesh.vertices[e.a]);
    const int da = dofs.vertex_to_dof[e.a];
    const int db = dofs.vertex_to_dof[e.b];
    const double diag = weight * len / 3.0;
    const double off = weight * len / 6.0;
    if (da >= 0) b.add(da, da, diag);
    if (db >= 0) b.add(db, db, diag);
    if (da >= 0 && db >= 0) b.add_symmetric(da, db, off);
  }
  return b.build();
}

FieldVector lumped_measure(const TriMesh& mesh, const DofMap& dofs, Region region) {
  FieldVector lump(static_cast<std::size_t>(dofs.n_dofs), 0.0);
  if (region == Region::domain) {
    for (const auto& tr : mesh.triangles) {
      const P1Gradients gr = p1_gradients(mesh, tr);
      for (int i = 0; i < 3; ++i) {
        const int d = dofs.vertex_to_dof[tr[i]];
        if (d >= 0) lump[static_cast<std::size_t>(d)] += gr.area / 3.0;
      }
    }
  } else {
    for (const BoundaryEdge& e : mesh.boundary_edges) {
      if (e.tag != BoundaryTag::hole) continue;
      const double len = norm(mesh.vertices[e.b] - mesh.vertices[e.a]);
      const int da = dofs.vertex_to_dof[e.a];
      const int db = dofs.vertex_to_dof[e.b];
      if (da >= 0) lump[static_cast<std::size_t>(da)] += 0.5 * len;
      if (db >= 0) lump[static_cast<std::size_t>(db)] += 0.5 * len;
    }
  }
  return lump;
}

FieldVector apply_lumped(const std::function<double(double)>& fn, const FieldVector& state,
                         const FieldVector& lump, double weight) {
  FieldVector out(state.size(), 0.0);
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (lump[i] != 0.0) out[i] = weight * fn(state[i]) * lump[i];
  }
  return out;
}

FieldVector assemble_nonlinear(const TriMesh& mesh, const DofMap& dofs,
                               const std::function<double(double)>& fn, const FieldVector& state,
                               Region region, double weight) {
  return apply_lumped(fn, state, lumped_measure(mesh, dofs, region), weight);
}

FieldVector assemble_load(const TriMesh& mesh, const DofMap& dofs,
                          const std::function<double(Vec2)>& fn, Region region, double weight) {
  const FieldVector lump = lumped_measure(mesh, dofs, region);
  const std::vector<Vec2> pos = dof_positions(mesh, dofs);
  FieldVector out(static_cast<std::size_t>(dofs.n_dofs), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (lump[i] != 0.0) out[i] = weight * fn(pos[i]) * lump[i];
  return out;
}

std::vector<Vec2> dof_positions(const TriMesh& mesh, const DofMap& dofs) {
  std::vector<Vec2> pos(static_cast<std::size_t>(dofs.n_dofs));
  std::vector<char> seen(static_cast<std::size_t>(dofs.n_dofs), 0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const int d = dofs.vertex_to_dof[v];
    if (d >= 0 && !seen[static_cast<std::size_t>(d)]) {
      pos[static_cast<std::size_t>(d)] = mesh.vertices[v];
      seen[static_cast<std::size_t>(d)] = 1;
    }
  }
  return pos;
}

namespace {

double sgn_pow(double s, double expo) { return std::pow(std::abs(s), expo - 2.0) * s; }

}  // namespace

Nonlinearity make_nonlinearity(FKind f_kind, double p, GKind g_kind) {
  Nonlinearity nl;
  nl.q = 2.0;
  nl.alpha1 = 1.0;
  nl.beta = 1.0;
  switch (f_kind) {
    case FKind::linear:
      nl.p = 2.0;
      nl.f = [](double s) { return s; };
      nl.F_antideriv = [](double s) { return 0.5 * s * s; };
      break;
    case FKind::power:
      if (p < 2.0) throw ConfigError("power nonlinearity requires p >= 2");
      nl.p = p;
      nl.f = [p](double s) { return sgn_pow(s, p); };
      nl.F_antideriv = [p](double s) { return std::pow(std::abs(s), p) / p; };
      break;
  }
  switch (g_kind) {
    case GKind::linear:
      nl.g = [](double s) { return s; };
      nl.G_antideriv = [](double s) { return 0.5 * s * s; };
      nl.alpha2 = 1.0;
      nl.ell = 1.0;
      break;
    case GKind::linear_tanh:
      nl.g = [](double s) { return s + std::tanh(s); };
      nl.G_antideriv = [](double s) { return 0.5 * s * s + std::log(std::cosh(s)); };
      nl.alpha2 = 2.0;
      nl.ell = 2.0;
      break;
  }
  return nl;
}

void validate_nonlinearity(const Nonlinearity& nl, double span, double step) {
  if (span < 10.0 || step > 0.01 + 1e-15) throw ConfigError("validation grid too coarse");
  const int n = static_cast<int>(std::lround(2.0 * span / step));
  const double tol = 1e-9;
  std::vector<double> s_vals(static_cast<std::size_t>(n) + 1);
  std::vector<double> f_vals(s_vals.size()), g_vals(s_vals.size());
  for (int i = 0; i <= n; ++i) {
    const double s = -span + step * i;
    s_vals[static_cast<std::size_t>(i)] = s;
    f_vals[static_cast<std::size_t>(i)] = nl.f(s);
    g_vals[static_cast<std::size_t>(i)] = nl.g(s);
    const double fs = f_vals[static_cast<std::size_t>(i)] * s;
    const double gs = g_vals[static_cast<std::size_t>(i)] * s;
    const double sp = std::pow(std::abs(s), nl.p);
    const double sq = std::pow(std::abs(s), nl.q);
    if (fs < nl.alpha1 * sp - nl.beta - tol || fs > nl.alpha2 * sp + nl.beta + tol)
      throw ConfigError("nonlinearity f violates its growth bounds");
    if (gs < nl.alpha1 * sq - nl.beta - tol || gs > nl.alpha2 * sq + nl.beta + tol)
      throw ConfigError("nonlinearity g violates its growth bounds");
  }
  for (std::size_t i = 0; i < s_vals.size(); ++i) {
    for (std::size_t j = i + 1; j < s_vals.size(); ++j) {
      const double ds = s_vals[j] - s_vals[i];
      if ((f_vals[j] - f_vals[i]) * ds < -nl.ell * ds * ds - tol)
        throw ConfigError("nonlinearity f violates the one-sided bound");
      if ((g_vals[j] - g_vals[i]) * ds < -nl.ell * ds * ds - tol)
        throw ConfigError("nonlinearity g violates the one-sided bound");
    }
  }
  if (std::abs(nl.F_antideriv(0.0)) > 1e-12 || std::abs(nl.G_antideriv(0.0)) > 1e-12)
    throw ConfigError("antiderivatives must vanish at 0");
  const double fd_h = 1e-5;
  for (int i = 0; i <= 200; ++i) {
    const double s = -span + (2.0 * span / 200.0) * i;
    const double dF = (nl.F_antideriv(s + fd_h) - nl.F_antideriv(s - fd_h)) / (2.0 * fd_h);
    const double dG = (nl.G_antideriv(s + fd_h) - nl.G_antideriv(s - fd_h)) / (2.0 * fd_h);
    if (std::abs(dF - nl.f(s)) > 1e-4 * (1.0 + std::abs(nl.f(s))))
      throw ConfigError("F antiderivative does not match f");
    if (std::abs(dG - nl.g(s)) > 1e-4 * (1.0 + std::abs(nl.g(s))))
      throw ConfigError("G antiderivative does not match g");
  }
}

CgResult solve_spd(const SparseMatrix& a, const FieldVector& b, const CgOptions& opts,
                   const FieldVector* x0) {
  const std::size_t n = static_cast<std::size_t>(a.n);
  if (b.size() != n) throw NumericalError("solve_spd dimension mismatch");

  CgResult res;
  res.x.assign(n, 0.0);
  if (n == 0) return res;

  auto project = [&](FieldVector& v) {
    if (!opts.deflate_constants) return;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    for (double& x : v) x -= mean;
  };

  const double bnorm = std::sqrt(kernels::dot(b, b));
  if (bnorm == 0.0) return res;

  std::vector<double> diag = a.diagonal();
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 1.0;

  FieldVector r = b;
  if (x0 && x0->size() == n) {
    res.x = *x0;
    project(res.x);
    std::vector<double> ax(n);
    a.mul(res.x, ax);
    kernels::axpy(-1.0, ax, r);
  }
  project(r);

  FieldVector z(n), p(n), q(n);
  kernels::pointwise_mul(r, inv_diag, z);
  project(z);
  p = z;
  double rz = kernels::dot(r, z);
  double rnorm = std::sqrt(kernels::dot(r, r));

  for (int it = 0; it < opts.max_iter; ++it) {
    if (rnorm <= opts.rel_tol * bnorm) {
      res.iterations = it;
      res.rel_residual = rnorm / bnorm;
      return res;
    }
    a.mul(p, q);
    const double pq = kernels::dot(p, q);
    if (!(pq > 0.0)) {
      throw NumericalError("CG breakdown: operator not positive definite (p^T A p = " +
                           std::to_string(pq) + ")");
    }
    const double alpha = rz / pq;
    kernels::axpy(alpha, p, res.x);
    kernels::axpy(-alpha, q, r);
    project(r);
    kernels::pointwise_mul(r, inv_diag, z);
    project(z);
    const double rz_new = kernels::dot(r, z);
    kernels::xpay(z, rz_new / rz, p);
    rz = rz_new;
    rnorm = std::sqrt(kernels::dot(r, r));
  }
  if (rnorm <= opts.rel_tol * bnorm) {
    res.iterations = opts.max_iter;
    res.rel_residual = rnorm / bnorm;
    return res;
  }
  throw NumericalError("CG did not converge within " + std::to_string(opts.max_iter) +
                       " iterations; last relative residual " + std::to_string(rnorm / bnorm));
}

}  // namespace perfhom
