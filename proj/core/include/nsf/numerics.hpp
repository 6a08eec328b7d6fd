// Small-dimension complex Hermitian linear algebra and the confluent
// hypergeometric function. Everything here is a pure function of its inputs
// and safe to call from any number of threads.
#pragma once

#include <Eigen/Dense>
#include <complex>

#include "nsf/errors.hpp"

namespace nsf {

// Cholesky factorization of a Hermitian positive-definite matrix with
// trace-scaled diagonal loading. Loading starts at 1e-10 * trace/D and
// escalates by factors of ten up to 1e-6 * trace/D before giving up with
// NotPositiveDefinite.
class HermitianFactor {
 public:
  explicit HermitianFactor(const Eigen::MatrixXcd& a);

  int dim() const { return static_cast<int>(llt_.matrixLLT().rows()); }

  // Solves A x = b against the original (unloaded) matrix; one step of
  // iterative refinement removes the loading bias.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;

  // y^H A^{-1} y (real and nonnegative for Hermitian PD A).
  double quadratic(const Eigen::VectorXcd& y) const;

  // log |A| of the loaded matrix.
  double log_det() const { return log_det_; }

  // Diagonal load that was actually applied.
  double loading() const { return loading_; }

 private:
  Eigen::LLT<Eigen::MatrixXcd> llt_;
  Eigen::MatrixXcd original_;
  double log_det_ = 0.0;
  double loading_ = 0.0;
};

// Solves A x = b for Hermitian positive-definite A (with diagonal loading
// as above). Never forms A^{-1}.
Eigen::VectorXcd hermitian_solve(const Eigen::MatrixXcd& a,
                                 const Eigen::VectorXcd& b);

// Unit-norm eigenvector of the largest eigenvalue of a Hermitian matrix,
// computed by shifted power iteration with Rayleigh-quotient stopping
// (tolerance 1e-10, at most 500 iterations). The phase is fixed so that the
// first nonzero entry is real and positive, making the output deterministic.
Eigen::VectorXcd principal_eigenvector(const Eigen::MatrixXcd& a);

// Confluent hypergeometric function M(a, b, x) for a > 0, b > 0, x >= 0.
// Power series below the crossover at x = 30, asymptotic expansion above.
double kummer_m(double a, double b, double x);

// log M(a, b, x); stays finite where M itself would overflow.
double log_kummer_m(double a, double b, double x);

// Crossover between the series and asymptotic branches of kummer_m.
inline constexpr double kKummerCrossover = 30.0;

}  // namespace nsf
