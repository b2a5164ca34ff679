#include "bsfr/mvn.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "bsfr/errors.hpp"
#include "bsfr/normal.hpp"

namespace bsfr {

double CholeskyFactor::log_det() const { return 2.0 * lower.diagonal().array().log().sum(); }

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = lower.triangularView<Eigen::Lower>().solve(b);
  lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd x = lower.triangularView<Eigen::Lower>().solve(b);
  lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

CholeskyFactor chol_with_jitter(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw DomainError("chol_with_jitter: matrix must be square");
  }
  const Eigen::Index n = a.rows();
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd work = a;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
      CholeskyFactor out;
      out.lower = llt.matrixL();
      out.jitter = jitter;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "matrix of size " << n << " is not positive definite even with jitter "
      << kJitterLadder.back();
  throw NotPositiveDefinite(msg.str());
}

MvnSpec MvnSpec::from_covariance(Eigen::VectorXd mean, const Eigen::MatrixXd& cov) {
  if (mean.size() != cov.rows()) {
    throw DomainError("MvnSpec: mean and covariance dimensions differ");
  }
  CholeskyFactor factor = chol_with_jitter(cov);
  return MvnSpec{std::move(mean), std::move(factor.lower), factor.jitter};
}

Eigen::VectorXd mvn_sample(const MvnSpec& spec, RngStream& rng) {
  Eigen::VectorXd z(spec.dim());
  rng.fill_normal(z);
  return spec.mean + spec.chol_lower.triangularView<Eigen::Lower>() * z;
}

double mvn_logpdf(const MvnSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.dim()) {
    throw DomainError("mvn_logpdf: dimension mismatch");
  }
  const Eigen::VectorXd w =
      spec.chol_lower.triangularView<Eigen::Lower>().solve(x - spec.mean);
  const double log_det = 2.0 * spec.chol_lower.diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - 0.5 * log_det - static_cast<double>(spec.dim()) * kLogSqrt2Pi;
}

}  // namespace bsfr
