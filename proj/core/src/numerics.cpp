#include "nsf/numerics.hpp"

#include <cmath>
#include <limits>

namespace nsf {

namespace {

constexpr double kLoadingStart = 1e-10;
constexpr double kLoadingMax = 1e-6;

}  // namespace

HermitianFactor::HermitianFactor(const Eigen::MatrixXcd& a) : original_(a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw DomainError("HermitianFactor: matrix must be square and nonempty");
  }
  const int dim = static_cast<int>(a.rows());
  const double base_load = a.trace().real() / dim;
  for (double eps = kLoadingStart; eps <= kLoadingMax * 1.5; eps *= 10.0) {
    const double load = eps * base_load;
    Eigen::MatrixXcd loaded = a;
    loaded.diagonal().array() += load;
    llt_.compute(loaded);
    if (llt_.info() != Eigen::Success) continue;
    double log_det = 0.0;
    bool ok = true;
    for (int i = 0; i < dim; ++i) {
      const double pivot = llt_.matrixLLT()(i, i).real();
      if (!(pivot > 0.0) || !std::isfinite(pivot)) {
        ok = false;
        break;
      }
      log_det += std::log(pivot);
    }
    if (!ok) continue;
    log_det_ = 2.0 * log_det;
    loading_ = load;
    return;
  }
  throw NotPositiveDefinite(
      "HermitianFactor: factorization failed at maximum diagonal loading");
}

Eigen::VectorXcd HermitianFactor::solve(const Eigen::VectorXcd& b) const {
  if (b.size() != dim()) {
    throw DomainError("HermitianFactor::solve: dimension mismatch");
  }
  Eigen::VectorXcd x = llt_.solve(b);
  // One refinement step against the unloaded matrix.
  x += llt_.solve(b - original_ * x);
  return x;
}

double HermitianFactor::quadratic(const Eigen::VectorXcd& y) const {
  if (y.size() != dim()) {
    throw DomainError("HermitianFactor::quadratic: dimension mismatch");
  }
  // y^H A^{-1} y = ||L^{-1} y||^2 with A = L L^H.
  Eigen::VectorXcd x =
      llt_.matrixL().solve(y);
  return x.squaredNorm();
}

Eigen::VectorXcd hermitian_solve(const Eigen::MatrixXcd& a,
                                 const Eigen::VectorXcd& b) {
  if (a.rows() != b.size()) {
    throw DomainError("hermitian_solve: dimension mismatch");
  }
  return HermitianFactor(a).solve(b);
}

Eigen::VectorXcd principal_eigenvector(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw DomainError("principal_eigenvector: matrix must be square");
  }
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());

  // Gershgorin shift makes every eigenvalue of h + shift*I nonnegative, so
  // the dominant eigenvalue in magnitude is the algebraically largest one.
  double shift = 0.0;
  for (int i = 0; i < n; ++i) {
    shift = std::max(shift, h.row(i).cwiseAbs().sum());
  }
  Eigen::MatrixXcd b = h;
  b.diagonal().array() += shift;

  // Deterministic start vector with energy in every coordinate direction.
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) {
    v(i) = std::complex<double>(1.0 + 0.05 * std::cos(1.0 + i),
                                0.05 * std::sin(0.7 * i + 0.3));
  }
  v.normalize();

  constexpr int kMaxIterations = 500;
  constexpr double kTolerance = 1e-10;
  const double scale = std::max(shift, std::numeric_limits<double>::min());
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    Eigen::VectorXcd w = b * v;
    const double norm = w.norm();
    if (norm == 0.0) break;  // b == 0: every vector is an eigenvector
    v = w / norm;
    const double rayleigh = (v.dot(h * v)).real();
    const double residual = (h * v - rayleigh * v).norm();
    if (residual <= kTolerance * std::max(std::abs(rayleigh), scale * 1e-6)) {
      // Phase convention: first nonzero entry real-positive.
      for (int i = 0; i < n; ++i) {
        const double mag = std::abs(v(i));
        if (mag > 1e-12) {
          v *= std::conj(v(i)) / mag;
          break;
        }
      }
      return v;
    }
  }
  throw NoConvergence("principal_eigenvector: power iteration did not converge");
}

namespace {

// Power series sum_{j>=0} (a)_j / ((b)_j j!) x^j. All terms are positive in
// the supported regime, so there is no cancellation.
double kummer_series(double a, double b, double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int j = 0; j < 1000; ++j) {
    term *= (a + j) / ((b + j) * (j + 1)) * x;
    sum += term;
    if (term <= sum * 1e-17) return sum;
  }
  return sum;
}

// log of the large-x expansion Gamma(b)/Gamma(a) e^x x^{a-b} sum_k t_k with
// t_k = (b-a)_k (1-a)_k / (k! x^k), truncated at the smallest term.
double log_kummer_asymptotic(double a, double b, double x) {
  double term = 1.0;
  double sum = 1.0;
  double prev_mag = 1.0;
  for (int k = 0; k < 64; ++k) {
    term *= (b - a + k) * (1.0 - a + k) / ((k + 1) * x);
    const double mag = std::abs(term);
    if (mag >= prev_mag) break;  // divergent tail reached
    sum += term;
    prev_mag = mag;
    if (mag <= std::abs(sum) * 1e-17) break;
  }
  return std::lgamma(b) - std::lgamma(a) + x + (a - b) * std::log(x) +
         std::log(sum);
}

void check_kummer_domain(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("kummer_m: requires a > 0 and b > 0");
  }
  if (!(x >= 0.0)) {
    throw DomainError("kummer_m: requires x >= 0");
  }
}

}  // namespace

double kummer_m(double a, double b, double x) {
  check_kummer_domain(a, b, x);
  if (x == 0.0) return 1.0;
  if (x < kKummerCrossover) return kummer_series(a, b, x);
  return std::exp(log_kummer_asymptotic(a, b, x));
}

double log_kummer_m(double a, double b, double x) {
  check_kummer_domain(a, b, x);
  if (x == 0.0) return 0.0;
  if (x < kKummerCrossover) return std::log(kummer_series(a, b, x));
  return log_kummer_asymptotic(a, b, x);
}

}  // namespace nsf
