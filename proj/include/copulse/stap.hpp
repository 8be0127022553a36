#pragma once

#include <Eigen/Dense>
#include <vector>

#include "copulse/covariance.hpp"
#include "copulse/scene.hpp"
#include "copulse/slepian.hpp"

namespace copulse::stap {

struct StapWeight {
  covariance::CovDomain domain = covariance::CovDomain::Physical;
  Eigen::VectorXcd w;
  Eigen::VectorXcd v_t;
  double sinr_out_db = 0.0;  // filled by callers that evaluate a total covariance
};

// Distortionless minimum-variance weight w = R^{-1} v / (v^H R^{-1} v).
// Throws Singular when the solve is unreliable or the quadratic form is not
// positive.
StapWeight weight(const covariance::HermitianCov& R, const Eigen::VectorXcd& v_t);
StapWeight weight(const slepian::FastInverse& R_inv, const Eigen::VectorXcd& v_t,
                  covariance::CovDomain domain);
StapWeight weight_inv(const Eigen::MatrixXcd& R_inv, const Eigen::VectorXcd& v_t,
                      covariance::CovDomain domain);

// 10 log10(sigma_t^2 |w^H v|^2 / Re(w^H R_den w)). R_den is usually the total
// Hermitian covariance; a one-sided projected product is admitted, hence the
// explicit real part.
double output_sinr_db(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& R_den,
                      const Eigen::VectorXcd& v_t, double sigma2_t);

// Rectangular evaluation lattice; endpoint-exclusive grids make periodic
// wraparound well defined for the ridge detector.
struct SpectrumGrid {
  std::vector<double> f_T;
  std::vector<double> f_d;
  std::vector<double> f_R;
};

std::vector<double> linspace_periodic(double lo, double hi, int n);  // n points, hi excluded

struct Spectrum {
  SpectrumGrid grid;
  Eigen::VectorXd power;  // index (i_T * n_d + i_d) * n_R + i_R

  double at(int i_T, int i_d, int i_R) const;
};

// Minimum-variance spectrum 1 / (v^H R^{-1} v) with v = a(f_T) kron b(f_d)
// kron c(f_R) on the geometry's index sets. The precomputed-inverse variant
// shares work across grid points via staged Kronecker contractions.
Spectrum mvdr_spectrum_inv(const Eigen::MatrixXcd& R_inv, const scene::Geometry& geom,
                           const SpectrumGrid& grid, int threads = 1);
Spectrum mvdr_spectrum(const covariance::HermitianCov& R, const scene::Geometry& geom,
                       const SpectrumGrid& grid, int threads = 1);

// Clutter-coupled 2-D slice P2(f_T, f_R) = P(f_T, beta f_R, f_R); rows f_T,
// columns f_R.
Eigen::MatrixXd mvdr_coupled_slice(const Eigen::MatrixXcd& R_inv, const scene::Geometry& geom,
                                   const std::vector<double>& f_T_grid,
                                   const std::vector<double>& f_R_grid, double beta,
                                   int threads = 1);

// Count connected components above peak * 10^(rel_threshold_db/10) under
// 8-connectivity; rows and/or columns wrap periodically.
int count_ridges(const Eigen::MatrixXd& slice, double rel_threshold_db = -10.0,
                 bool wrap_rows = true, bool wrap_cols = true);

// Dense inverse with a residual check; throws Singular with a hint to apply
// diagonal loading.
Eigen::MatrixXcd checked_inverse(const Eigen::MatrixXcd& R);

}  // namespace copulse::stap
