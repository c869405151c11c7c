#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace rsma {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// log2 det(I + A) for Hermitian positive semidefinite A, via Cholesky of I + A.
inline double log2det_i_plus(const CMat& a) {
  CMat m = CMat::Identity(a.rows(), a.cols()) + a;
  Eigen::LLT<CMat> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("log2det_i_plus: matrix not positive definite");
  }
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    acc += std::log2(std::real(l(i, i)));
  }
  return 2.0 * acc;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Rates below this are clamped to zero in reports.
inline constexpr double kRateClamp = 1e-12;

inline double clamp_rate(double r) { return r < kRateClamp ? 0.0 : r; }

}  // namespace rsma
