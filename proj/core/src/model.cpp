#include "latrbm/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace latrbm {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat to_eigen(const std::vector<double>& M, int d) {
  Mat out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = M[static_cast<size_t>(i) * d + j];
  return out;
}

constexpr double kSymTol = 1e-9;  // symmetry / skew-compatibility detection

void check_shapes(const RbmSpec& spec) {
  const size_t d = static_cast<size_t>(spec.d);
  if (spec.d < 1) throw ModelError("dimension must be >= 1");
  if (spec.b.size() != d) throw ModelError("drift vector length does not match d");
  if (spec.A.size() != d * d) throw ModelError("covariance matrix size does not match d*d");
  if (spec.R.size() != d * d) throw ModelError("reflection matrix size does not match d*d");
  for (int i = 0; i < spec.d; ++i)
    for (int j = i + 1; j < spec.d; ++j)
      if (std::abs(spec.a(i, j) - spec.a(j, i)) > kSymTol)
        throw ModelError("covariance matrix is not symmetric");
}

// Minimum over nonempty index subsets S and rows i in S of sum_{j in S} M_ij.
double min_principal_row_sum(const std::vector<double>& M, int d) {
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << d); ++mask)
    for (int i = 0; i < d; ++i) {
      if (!(mask & (1u << i))) continue;
      double s = 0;
      for (int j = 0; j < d; ++j)
        if (mask & (1u << j)) s += M[static_cast<size_t>(i) * d + j];
      best = std::min(best, s);
    }
  return best;
}

}  // namespace

ValidationReport validate_assumption(const RbmSpec& spec, bool require_stability) {
  check_shapes(spec);
  ValidationReport rep;
  const int d = spec.d;

  for (int i = 0; i < d; ++i) {
    double off = 0;
    for (int j = 0; j < d; ++j)
      if (j != i) off += std::abs(spec.a(i, j));
    if (!(spec.a(i, i) > off)) {
      std::ostringstream os;
      os << "covariance row " << i << " not strictly diagonally dominant ("
         << spec.a(i, i) << " <= " << off << ")";
      rep.failures.push_back(os.str());
    }
  }

  const Mat R = to_eigen(spec.R, d);
  Eigen::FullPivLU<Mat> lu(R);
  rep.det_R = lu.determinant();
  const double scale = std::pow(R.cwiseAbs().rowwise().sum().maxCoeff(), d);
  const bool invertible = std::abs(rep.det_R) > 1e-12 * std::max(scale, 1.0);
  if (!invertible) rep.failures.push_back("reflection matrix numerically singular");

  if (invertible) {
    Vec b(d);
    for (int i = 0; i < d; ++i) b(i) = spec.b[i];
    const Vec x = lu.solve(b);
    rep.Rinv_b.assign(x.data(), x.data() + d);
    bool stable = true;
    for (int i = 0; i < d; ++i) stable = stable && x(i) < 0;
    if (!stable) {
      const std::string msg = "R^{-1} b has a nonnegative component (no stationary law)";
      if (require_stability)
        rep.failures.push_back(msg);
      else
        rep.failures.push_back("[waived] " + msg);
    }
  }

  const std::vector<double> Rs = dual_reflection(spec.R, d);
  rep.min_row_sum =
      std::min(min_principal_row_sum(spec.R, d), min_principal_row_sum(Rs, d));
  if (!(rep.min_row_sum > 0))
    rep.failures.push_back(
        "a principal submatrix of R or R* has a nonpositive row sum");

  rep.ok = true;
  for (const auto& f : rep.failures)
    if (f.rfind("[waived]", 0) != 0) rep.ok = false;
  return rep;
}

void require_valid(const RbmSpec& spec, bool require_stability) {
  const ValidationReport rep = validate_assumption(spec, require_stability);
  if (!rep.ok) {
    std::string msg = "model admissibility check failed:";
    for (const auto& f : rep.failures) msg += "\n  - " + f;
    throw ModelError(msg);
  }
}

std::vector<double> dual_reflection(const std::vector<double>& R, int d) {
  std::vector<double> out(R.size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const size_t k = static_cast<size_t>(i) * d + j;
      out[k] = i == j ? R[k] : -R[k];
    }
  return out;
}

double InvariantDensity::log_density(const double* x, int d) const {
  double s = logC;
  for (int i = 0; i < d; ++i) s -= eta[i] * x[i];
  return s;
}

double InvariantDensity::density(const double* x, int d) const {
  return std::exp(log_density(x, d));
}

std::optional<InvariantDensity> skew_check(const RbmSpec& spec) {
  check_shapes(spec);
  const int d = spec.d;
  // RD with D = diag(A); compatibility asks 2A = RD + (RD)'.
  std::vector<double> RD(static_cast<size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      RD[static_cast<size_t>(i) * d + j] = spec.r(i, j) * spec.a(j, j);
  double dev = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double lhs = 2 * spec.a(i, j);
      const double rhs =
          RD[static_cast<size_t>(i) * d + j] + RD[static_cast<size_t>(j) * d + i];
      dev = std::max(dev, std::abs(lhs - rhs));
    }
  if (dev > kSymTol) return std::nullopt;

  std::vector<double> rhs(spec.b);
  for (auto& v : rhs) v *= -2.0;
  InvariantDensity p;
  p.eta = solve_dense(RD, rhs, d);
  p.logC = 0;
  for (int i = 0; i < d; ++i) {
    if (!(p.eta[i] > 0))
      throw ModelError("product-exponential rate vector has a nonpositive component");
    p.logC += std::log(p.eta[i]);
  }
  return p;
}

std::vector<double> sym_sqrt(const std::vector<double>& A, int d) {
  Eigen::SelfAdjointEigenSolver<Mat> es(to_eigen(A, d));
  if (es.info() != Eigen::Success) throw ModelError("eigendecomposition failed");
  const Vec& ev = es.eigenvalues();
  for (int i = 0; i < d; ++i)
    if (!(ev(i) > 0)) throw ModelError("covariance matrix is not positive definite");
  const Mat M = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
  std::vector<double> out(static_cast<size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out[static_cast<size_t>(i) * d + j] = M(i, j);
  return out;
}

std::vector<double> solve_dense(const std::vector<double>& M, const std::vector<double>& y,
                                int d) {
  Eigen::FullPivLU<Mat> lu(to_eigen(M, d));
  if (!lu.isInvertible()) throw ModelError("singular matrix in dense solve");
  Vec rhs(d);
  for (int i = 0; i < d; ++i) rhs(i) = y[i];
  const Vec x = lu.solve(rhs);
  return std::vector<double>(x.data(), x.data() + d);
}

}  // namespace latrbm
