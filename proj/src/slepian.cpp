#include "copulse/slepian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include "copulse/errors.hpp"
#include "copulse/rank.hpp"

namespace copulse::slepian {

namespace {

constexpr char kCacheMagic[4] = {'C', 'P', 'D', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_coarray_input(const SlepianBasis& basis, const covariance::HermitianCov& R,
                         const char* what) {
  if (R.domain == covariance::CovDomain::Physical)
    throw DimensionMismatch(std::string(what) + " must live in a coarray domain");
  if (R.matrix.rows() != basis.dim())
    throw DimensionMismatch(std::string(what) + " size does not match basis");
}

}  // namespace

DpssSet dpss(int M_T, double W) {
  if (M_T < 1) throw DimensionMismatch("sequence length must be >= 1");
  if (!(W > 0.0 && W < 0.5)) throw BadBandwidth("half-bandwidth must lie in (0, 0.5)");
  Eigen::MatrixXd B(M_T, M_T);
  for (int n = 0; n < M_T; ++n)
    for (int m = 0; m < M_T; ++m) {
      const int k = n - m;
      B(n, m) = k == 0 ? 2.0 * W
                       : std::sin(2.0 * std::numbers::pi * W * k) / (std::numbers::pi * k);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success) throw Error("prolate eigendecomposition failed");

  DpssSet out;
  out.M_T = M_T;
  out.W = W;
  out.vectors.resize(M_T, M_T);
  out.eigenvalues.resize(M_T);
  for (int i = 0; i < M_T; ++i) {
    const int src = M_T - 1 - i;  // ascending -> descending
    Eigen::VectorXd v = es.eigenvectors().col(src);
    Eigen::Index peak;
    v.cwiseAbs().maxCoeff(&peak);
    if (v[peak] < 0.0) v = -v;
    out.vectors.col(i) = v;
    out.eigenvalues[i] = es.eigenvalues()[src];
  }
  return out;
}

std::filesystem::path dpss_cache_path(const std::filesystem::path& dir, int M_T, double W,
                                      int N_T) {
  std::uint64_t bits;
  std::memcpy(&bits, &W, sizeof(bits));
  std::ostringstream name;
  name << "dpss_m" << M_T << "_w" << std::hex << bits << std::dec << "_n" << N_T << ".bin";
  return dir / name.str();
}

void save_dpss(const std::filesystem::path& path, const DpssSet& set, int N_T) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open cache file for writing: " + path.string());
  f.write(kCacheMagic, 4);
  auto put = [&f](const void* p, std::size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  const std::uint32_t ver = kCacheVersion;
  const std::int32_t mt = set.M_T, nt = N_T;
  put(&ver, sizeof(ver));
  put(&mt, sizeof(mt));
  put(&nt, sizeof(nt));
  put(&set.W, sizeof(set.W));
  put(set.vectors.data(), sizeof(double) * set.M_T * set.M_T);
  put(set.eigenvalues.data(), sizeof(double) * set.M_T);
  if (!f) throw Error("short write to cache file: " + path.string());
}

std::optional<DpssSet> load_dpss(const std::filesystem::path& path, int M_T, double W, int N_T) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  char magic[4];
  std::uint32_t ver = 0;
  std::int32_t mt = 0, nt = 0;
  double w = 0.0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&ver), sizeof(ver));
  f.read(reinterpret_cast<char*>(&mt), sizeof(mt));
  f.read(reinterpret_cast<char*>(&nt), sizeof(nt));
  f.read(reinterpret_cast<char*>(&w), sizeof(w));
  if (!f || std::memcmp(magic, kCacheMagic, 4) != 0 || ver != kCacheVersion || mt != M_T ||
      nt != N_T || w != W)
    return std::nullopt;
  DpssSet set;
  set.M_T = M_T;
  set.W = W;
  set.vectors.resize(M_T, M_T);
  set.eigenvalues.resize(M_T);
  f.read(reinterpret_cast<char*>(set.vectors.data()),
         static_cast<std::streamsize>(sizeof(double) * M_T * M_T));
  f.read(reinterpret_cast<char*>(set.eigenvalues.data()),
         static_cast<std::streamsize>(sizeof(double) * M_T));
  if (!f) return std::nullopt;
  return set;
}

SlepianBasis slepian_clutter_basis(const scene::CCubeConfig& cfg, int L_s, int L_t, int N_p,
                                   BandwidthConvention convention) {
  if (L_s < 0 || L_t < 0 || N_p < 1) throw DimensionMismatch("invalid basis dimensions");
  const Fraction beta = cfg.beta();
  const int M = static_cast<int>(beta.num), N = static_cast<int>(beta.den);
  const Fraction ratio = cfg.spacing_ratio();
  const int rows = (L_s + 1) * (L_t + 1);

  SlepianBasis basis;
  basis.L_s = L_s;
  basis.L_t = L_t;
  basis.N_p = N_p;
  basis.M_T = N * L_s + M * L_t + 1;
  basis.T_b = L_s + beta.value() * L_t;

  // Row (k, n) of the time-receive grid sits at dense-grid position N n + M k.
  auto position = [&](int k, int n) { return N * n + M * k; };

  if (ratio.den == 1 && ratio.num == N) {
    basis.branch = BasisBranch::Exact;
    std::map<int, std::vector<int>> groups;
    for (int k = 0; k <= L_t; ++k)
      for (int n = 0; n <= L_s; ++n) groups[position(k, n)].push_back(k * (L_s + 1) + n);
    basis.N_T = static_cast<int>(groups.size()) - 1;
    basis.U_c = Eigen::MatrixXcd::Zero(rows, basis.N_T + 1);
    int col = 0;
    for (const auto& [pos, members] : groups) {
      const double w = 1.0 / std::sqrt(static_cast<double>(members.size()));
      for (int r : members) basis.U_c(r, col) = w;
      ++col;
    }
  } else {
    basis.branch = BasisBranch::Approximate;
    const double lambda = cfg.lambda_b();
    basis.W = convention == BandwidthConvention::GridCorrected ? cfg.d / (N * lambda)
                                                               : cfg.d / lambda;
    if (!(basis.W > 0.0 && basis.W < 0.5))
      throw BadBandwidth("dense-grid half-bandwidth outside (0, 0.5)");
    basis.N_T = static_cast<int>(std::ceil(2.0 * cfg.d * basis.T_b / lambda - 1e-9));
    if (basis.N_T + 1 > rows) throw RankTooLarge("basis order exceeds grid size");
    const DpssSet seq = dpss(basis.M_T, basis.W);
    Eigen::MatrixXd sampled(rows, basis.N_T + 1);
    for (int k = 0; k <= L_t; ++k)
      for (int n = 0; n <= L_s; ++n)
        sampled.row(k * (L_s + 1) + n) = seq.vectors.row(position(k, n)).head(basis.N_T + 1);
    // sampled columns are not exactly orthonormal off the dense grid
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(sampled);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, basis.N_T + 1);
    const Eigen::MatrixXd R =
        qr.matrixQR().topRows(basis.N_T + 1).triangularView<Eigen::Upper>();
    const double top = std::abs(R(0, 0));
    for (int j = 0; j <= basis.N_T; ++j) {
      if (std::abs(R(j, j)) < 1e-10 * top)
        throw RankTooLarge("sampled sequence columns are rank deficient");
      if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    }
    basis.U_c = Q.cast<std::complex<double>>();
  }

  std::vector<int> seg(L_s + 1);
  for (int i = 0; i <= L_s; ++i) seg[i] = i;
  basis.A_T.resize(L_s + 1, N_p);
  for (int p = 1; p <= N_p; ++p) basis.A_T.col(p - 1) = scene::steer(seg, cfg.f_T_compensated(p));
  basis.V_c = kron(basis.A_T, basis.U_c);
  return basis;
}

Eigen::MatrixXcd estimate_Dc(const SlepianBasis& basis, const covariance::HermitianCov& R_v_hat,
                             const covariance::HermitianCov& R_n_hat, FlopCount* flops) {
  check_coarray_input(basis, R_v_hat, "R_v estimate");
  check_coarray_input(basis, R_n_hat, "R_n estimate");
  const Eigen::Index D = basis.dim(), r_b = basis.r_b();

  const Eigen::MatrixXcd G = basis.A_T.adjoint() * basis.A_T;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw SingularGram("transmit steering Gram matrix is ill-conditioned");

  // V^+ = (G^{-1} A^H) kron U^H since U has orthonormal columns
  const Eigen::MatrixXcd A_pinv = G.ldlt().solve(basis.A_T.adjoint());
  const Eigen::MatrixXcd V_pinv = kron(A_pinv, basis.U_c.adjoint());
  const Eigen::MatrixXcd delta = R_v_hat.matrix - R_n_hat.matrix;
  const Eigen::MatrixXcd half = V_pinv * delta;
  Eigen::MatrixXcd D_c = covariance::hermitian_part(half * V_pinv.adjoint());
  if (flops) {
    flops->matmul(r_b, D, D);
    flops->matmul(r_b, D, r_b);
  }
  return D_c;
}

FastInverse::FastInverse(const SlepianBasis& basis, Eigen::MatrixXcd D_c,
                         const Eigen::MatrixXcd& R_n) {
  dim_ = basis.dim();
  const Eigen::Index r_b = basis.r_b();
  if (D_c.rows() != r_b || D_c.cols() != r_b)
    throw DimensionMismatch("core matrix size does not match basis");
  if (R_n.rows() != dim_ || R_n.cols() != dim_)
    throw DimensionMismatch("noise covariance size does not match basis");

  diagonal_noise_ = R_n.isDiagonal(1e-12);
  if (diagonal_noise_) {
    const Eigen::VectorXcd d = R_n.diagonal();
    if ((d.real().array() <= 0.0).any())
      throw SingularCore("noise covariance diagonal must be positive");
    inv_diag_ = d.cwiseInverse();
  } else {
    noise_ldlt_.compute(R_n);
    if (noise_ldlt_.info() != Eigen::Success || !noise_ldlt_.isPositive())
      throw SingularCore("noise covariance is not positive definite");
    flops_.ldlt(dim_);
  }

  const double noise_scale = R_n.diagonal().real().mean();
  const double dc_scale = D_c.cwiseAbs().maxCoeff();
  if (dc_scale <= 1e-14 * noise_scale) {
    active_ = false;  // correction negligible: inverse reduces to R_n^{-1}
    return;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(covariance::hermitian_part(D_c),
                                                     Eigen::EigenvaluesOnly);
  flops_.eigenvalues_only(r_b);
  const Eigen::VectorXd mag = es.eigenvalues().cwiseAbs();
  const double hi = mag.maxCoeff(), lo = mag.minCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    const double tr = D_c.real().trace();
    const double ridge = 1e-10 * (tr > 0.0 ? tr / static_cast<double>(r_b) : hi);
    D_c += ridge * Eigen::MatrixXcd::Identity(r_b, r_b);
  }

  Eigen::FullPivLU<Eigen::MatrixXcd> lu_D(D_c);
  if (!lu_D.isInvertible()) throw SingularCore("core matrix not invertible after regularization");
  const Eigen::MatrixXcd D_inv = lu_D.inverse();
  flops_.lu_inverse(r_b);

  if (diagonal_noise_) {
    Ninv_V_ = inv_diag_.asDiagonal() * basis.V_c;
    flops_.scale(dim_ * r_b);
  } else {
    Ninv_V_ = noise_ldlt_.solve(basis.V_c);
    flops_.matmul(dim_, dim_, r_b);
  }
  const Eigen::MatrixXcd core = D_inv + basis.V_c.adjoint() * Ninv_V_;
  flops_.matmul(r_b, dim_, r_b);

  Eigen::FullPivLU<Eigen::MatrixXcd> lu_core(core);
  if (!lu_core.isInvertible()) throw SingularCore("inversion-lemma core is singular");
  core_inv_ = lu_core.inverse();
  flops_.lu_inverse(r_b);
  active_ = true;
}

Eigen::VectorXcd FastInverse::noise_solve(const Eigen::VectorXcd& x) const {
  if (diagonal_noise_) {
    flops_.scale(dim_);
    return inv_diag_.cwiseProduct(x);
  }
  flops_.matmul(dim_, dim_, 1);
  return noise_ldlt_.solve(x);
}

Eigen::VectorXcd FastInverse::apply(const Eigen::VectorXcd& x) const {
  if (x.size() != dim_) throw DimensionMismatch("vector size does not match inverse");
  Eigen::VectorXcd y = noise_solve(x);
  if (!active_) return y;
  const Eigen::Index r_b = Ninv_V_.cols();
  const Eigen::VectorXcd u = Ninv_V_.adjoint() * x;
  const Eigen::VectorXcd w = core_inv_ * u;
  flops_.matmul(r_b, dim_, 1);
  flops_.matmul(r_b, r_b, 1);
  flops_.matmul(dim_, r_b, 1);
  return y - Ninv_V_ * w;
}

Eigen::MatrixXcd FastInverse::dense() const {
  Eigen::MatrixXcd base;
  if (diagonal_noise_) {
    base = inv_diag_.asDiagonal();
    flops_.scale(dim_);
  } else {
    base = noise_ldlt_.solve(Eigen::MatrixXcd::Identity(dim_, dim_));
    flops_.matmul(dim_, dim_, dim_);
  }
  if (!active_) return base;
  const Eigen::Index r_b = Ninv_V_.cols();
  const Eigen::MatrixXcd t = core_inv_ * Ninv_V_.adjoint();
  flops_.matmul(r_b, r_b, dim_);
  flops_.matmul(dim_, r_b, dim_);
  return covariance::hermitian_part(base - Ninv_V_ * t);
}

Eigen::VectorXd low_rank_eigenvalues(const SlepianBasis& basis, const Eigen::MatrixXcd& D_c) {
  const Eigen::Index r_b = basis.r_b();
  if (D_c.rows() != r_b || D_c.cols() != r_b)
    throw DimensionMismatch("core matrix size does not match basis");
  // V^H V = (A^H A) kron I because U is orthonormal
  const Eigen::MatrixXcd G = basis.A_T.adjoint() * basis.A_T;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  const Eigen::MatrixXcd G_half = es.eigenvectors() *
                                  es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                  es.eigenvectors().adjoint();
  const Eigen::MatrixXcd S =
      kron(G_half, Eigen::MatrixXcd::Identity(basis.N_T + 1, basis.N_T + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(
      covariance::hermitian_part(S * D_c * S), Eigen::EigenvaluesOnly);
  return es2.eigenvalues().reverse();
}

double subspace_capture(const SlepianBasis& basis, const Eigen::MatrixXcd& R) {
  if (R.rows() != basis.dim() || R.cols() != basis.dim())
    throw DimensionMismatch("covariance size does not match basis");
  const Eigen::MatrixXcd& V = basis.V_c;
  const Eigen::MatrixXcd G = V.adjoint() * V;
  const Eigen::MatrixXcd RV = R * V;
  const Eigen::MatrixXcd X = G.ldlt().solve(V.adjoint() * RV);
  const double total = R.trace().real();
  if (total <= 0.0) throw Empty("covariance has nonpositive trace");
  return X.trace().real() / total;
}

}  // namespace copulse::slepian
