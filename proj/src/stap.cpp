#include "copulse/stap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "copulse/errors.hpp"

namespace copulse::stap {

namespace {

StapWeight normalize(Eigen::VectorXcd x, const Eigen::VectorXcd& v_t,
                     covariance::CovDomain domain) {
  const double den = v_t.dot(x).real();
  if (!std::isfinite(den) || den <= 0.0)
    throw Singular("quadratic form v^H R^{-1} v is not positive");
  StapWeight out;
  out.domain = domain;
  out.v_t = v_t;
  out.w = x / den;
  return out;
}

}  // namespace

StapWeight weight(const covariance::HermitianCov& R, const Eigen::VectorXcd& v_t) {
  if (v_t.size() != R.matrix.rows())
    throw DimensionMismatch("steering vector size does not match covariance");
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(R.matrix);
  if (ldlt.info() != Eigen::Success) throw Singular("covariance factorization failed");
  Eigen::VectorXcd x = ldlt.solve(v_t);
  const double resid = (R.matrix * x - v_t).norm() / v_t.norm();
  if (!std::isfinite(resid) || resid > 1e-6)
    throw Singular("covariance is numerically singular; apply diagonal loading");
  return normalize(std::move(x), v_t, R.domain);
}

StapWeight weight(const slepian::FastInverse& R_inv, const Eigen::VectorXcd& v_t,
                  covariance::CovDomain domain) {
  return normalize(R_inv.apply(v_t), v_t, domain);
}

StapWeight weight_inv(const Eigen::MatrixXcd& R_inv, const Eigen::VectorXcd& v_t,
                      covariance::CovDomain domain) {
  if (v_t.size() != R_inv.rows())
    throw DimensionMismatch("steering vector size does not match inverse");
  return normalize(R_inv * v_t, v_t, domain);
}

double output_sinr_db(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& R_den,
                      const Eigen::VectorXcd& v_t, double sigma2_t) {
  if (w.size() != R_den.rows() || v_t.size() != R_den.rows())
    throw DimensionMismatch("weight/steering size does not match covariance");
  const double num = sigma2_t * std::norm(w.dot(v_t));
  const double den = w.dot(R_den * w).real();
  if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

std::vector<double> linspace_periodic(double lo, double hi, int n) {
  if (n < 1) throw DimensionMismatch("grid needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / n;
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  return out;
}

double Spectrum::at(int i_T, int i_d, int i_R) const {
  const auto n_d = static_cast<Eigen::Index>(grid.f_d.size());
  const auto n_R = static_cast<Eigen::Index>(grid.f_R.size());
  return power[(static_cast<Eigen::Index>(i_T) * n_d + i_d) * n_R + i_R];
}

namespace {

// Collapse the transmit factor: G1[(i2 i3),(j2 j3)] = sum conj(a_i1) a_j1 B(i1,j1)
Eigen::MatrixXcd contract_transmit(const Eigen::MatrixXcd& R_inv, const Eigen::VectorXcd& a,
                                   Eigen::Index inner) {
  const Eigen::Index P1 = a.size();
  Eigen::MatrixXcd G1 = Eigen::MatrixXcd::Zero(inner, inner);
  for (Eigen::Index i1 = 0; i1 < P1; ++i1)
    for (Eigen::Index j1 = 0; j1 < P1; ++j1)
      G1.noalias() +=
          std::conj(a[i1]) * a[j1] * R_inv.block(i1 * inner, j1 * inner, inner, inner);
  return G1;
}

Eigen::MatrixXcd contract_time(const Eigen::MatrixXcd& G1, const Eigen::VectorXcd& b,
                               Eigen::Index P3) {
  const Eigen::Index P2 = b.size();
  Eigen::MatrixXcd G2 = Eigen::MatrixXcd::Zero(P3, P3);
  for (Eigen::Index i2 = 0; i2 < P2; ++i2)
    for (Eigen::Index j2 = 0; j2 < P2; ++j2)
      G2.noalias() += std::conj(b[i2]) * b[j2] * G1.block(i2 * P3, j2 * P3, P3, P3);
  return G2;
}

double quad_form(const Eigen::MatrixXcd& G2, const Eigen::VectorXcd& c) {
  return c.dot(G2 * c).real();
}

void run_chunked(int n, int threads, const std::function<void(int, int)>& body) {
  const int nt = std::max(1, std::min(threads, n));
  if (nt == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const int b = t * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back(body, b, e);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

Spectrum mvdr_spectrum_inv(const Eigen::MatrixXcd& R_inv, const scene::Geometry& geom,
                           const SpectrumGrid& grid, int threads) {
  if (R_inv.rows() != R_inv.cols() || R_inv.rows() != geom.dim())
    throw DimensionMismatch("inverse size does not match geometry");
  const auto n_T = static_cast<int>(grid.f_T.size());
  const auto n_d = static_cast<int>(grid.f_d.size());
  const auto n_R = static_cast<int>(grid.f_R.size());
  const Eigen::Index P3 = static_cast<Eigen::Index>(geom.rx.size());
  const Eigen::Index inner = static_cast<Eigen::Index>(geom.time.size()) * P3;

  Spectrum out;
  out.grid = grid;
  out.power.resize(static_cast<Eigen::Index>(n_T) * n_d * n_R);

  run_chunked(n_T, threads, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const Eigen::MatrixXcd G1 =
          contract_transmit(R_inv, scene::steer(geom.tx, grid.f_T[static_cast<std::size_t>(i)]),
                            inner);
      for (int j = 0; j < n_d; ++j) {
        const Eigen::MatrixXcd G2 =
            contract_time(G1, scene::steer(geom.time, grid.f_d[static_cast<std::size_t>(j)]), P3);
        for (int k = 0; k < n_R; ++k) {
          const double q =
              quad_form(G2, scene::steer(geom.rx, grid.f_R[static_cast<std::size_t>(k)]));
          if (!(q > 0.0))
            throw Singular("spectrum quadratic form nonpositive; covariance needs loading");
          out.power[(static_cast<Eigen::Index>(i) * n_d + j) * n_R + k] = 1.0 / q;
        }
      }
    }
  });
  return out;
}

Eigen::MatrixXcd checked_inverse(const Eigen::MatrixXcd& R) {
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(R);
  if (ldlt.info() != Eigen::Success) throw Singular("covariance factorization failed");
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  const double p_max = pivots.maxCoeff();
  if (!(p_max > 0.0) || pivots.minCoeff() <= p_max * 1e-13)
    throw Singular("covariance is numerically singular; apply diagonal loading");
  Eigen::MatrixXcd inv = ldlt.solve(Eigen::MatrixXcd::Identity(R.rows(), R.cols()));
  const Eigen::VectorXcd probe = Eigen::VectorXcd::Ones(R.rows());
  const double resid = (R * (inv * probe) - probe).norm() / probe.norm();
  if (!std::isfinite(resid) || resid > 1e-6)
    throw Singular("covariance is numerically singular; apply diagonal loading");
  return inv;
}

Spectrum mvdr_spectrum(const covariance::HermitianCov& R, const scene::Geometry& geom,
                       const SpectrumGrid& grid, int threads) {
  return mvdr_spectrum_inv(checked_inverse(R.matrix), geom, grid, threads);
}

Eigen::MatrixXd mvdr_coupled_slice(const Eigen::MatrixXcd& R_inv, const scene::Geometry& geom,
                                   const std::vector<double>& f_T_grid,
                                   const std::vector<double>& f_R_grid, double beta,
                                   int threads) {
  if (R_inv.rows() != R_inv.cols() || R_inv.rows() != geom.dim())
    throw DimensionMismatch("inverse size does not match geometry");
  const auto n_T = static_cast<int>(f_T_grid.size());
  const auto n_R = static_cast<int>(f_R_grid.size());
  const Eigen::Index P3 = static_cast<Eigen::Index>(geom.rx.size());
  const Eigen::Index inner = static_cast<Eigen::Index>(geom.time.size()) * P3;

  Eigen::MatrixXd out(n_T, n_R);
  run_chunked(n_T, threads, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const Eigen::MatrixXcd G1 = contract_transmit(
          R_inv, scene::steer(geom.tx, f_T_grid[static_cast<std::size_t>(i)]), inner);
      for (int k = 0; k < n_R; ++k) {
        const double f_R = f_R_grid[static_cast<std::size_t>(k)];
        const Eigen::MatrixXcd G2 = contract_time(G1, scene::steer(geom.time, beta * f_R), P3);
        const double q = quad_form(G2, scene::steer(geom.rx, f_R));
        if (!(q > 0.0))
          throw Singular("spectrum quadratic form nonpositive; covariance needs loading");
        out(i, k) = 1.0 / q;
      }
    }
  });
  return out;
}

int count_ridges(const Eigen::MatrixXd& slice, double rel_threshold_db, bool wrap_rows,
                 bool wrap_cols) {
  const int rows = static_cast<int>(slice.rows()), cols = static_cast<int>(slice.cols());
  if (rows == 0 || cols == 0) throw Empty("ridge detector needs a nonempty slice");
  const double thr = slice.maxCoeff() * std::pow(10.0, rel_threshold_db / 10.0);
  std::vector<char> active(static_cast<std::size_t>(rows) * cols, 0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      active[static_cast<std::size_t>(r) * cols + c] = slice(r, c) >= thr ? 1 : 0;

  std::vector<char> seen(active.size(), 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int r0 = 0; r0 < rows; ++r0)
    for (int c0 = 0; c0 < cols; ++c0) {
      const std::size_t start = static_cast<std::size_t>(r0) * cols + c0;
      if (!active[start] || seen[start]) continue;
      ++components;
      seen[start] = 1;
      stack.assign(1, {r0, c0});
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            int nr = r + dr, nc = c + dc;
            if (wrap_rows)
              nr = (nr + rows) % rows;
            else if (nr < 0 || nr >= rows)
              continue;
            if (wrap_cols)
              nc = (nc + cols) % cols;
            else if (nc < 0 || nc >= cols)
              continue;
            const std::size_t idx = static_cast<std::size_t>(nr) * cols + nc;
            if (active[idx] && !seen[idx]) {
              seen[idx] = 1;
              stack.emplace_back(nr, nc);
            }
          }
      }
    }
  return components;
}

}  // namespace copulse::stap
