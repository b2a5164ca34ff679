#include "bsfr/kernels.hpp"

#include <cmath>

#include "bsfr/errors.hpp"

namespace bsfr {

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return "squared_exponential";
    case KernelFamily::Matern12:
      return "matern12";
    case KernelFamily::Matern52:
      return "matern52";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "squared_exponential" || name == "se") return KernelFamily::SquaredExponential;
  if (name == "matern12") return KernelFamily::Matern12;
  if (name == "matern52") return KernelFamily::Matern52;
  throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

CovKernel::CovKernel(KernelFamily family, double scale, double length_scale)
    : family_(family), scale_(scale), length_scale_(length_scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("CovKernel: scale must be positive and finite");
  }
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw DomainError("CovKernel: length_scale must be positive and finite");
  }
}

double CovKernel::at_distance(double r) const {
  const double s2 = scale_ * scale_;
  const double u = std::abs(r) / length_scale_;
  switch (family_) {
    case KernelFamily::SquaredExponential:
      return s2 * std::exp(-0.5 * u * u);
    case KernelFamily::Matern12:
      return s2 * std::exp(-u);
    case KernelFamily::Matern52: {
      const double a = std::sqrt(5.0) * u;
      return s2 * (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
  }
  return 0.0;
}

double CovKernel::operator()(double t, double t_prime) const { return at_distance(t - t_prime); }

double CovKernel::operator()(const Point2& a, const Point2& b) const {
  return at_distance(distance(a, b));
}

Eigen::MatrixXd gram(const CovKernel& kernel, std::span<const double> times) {
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j, j) = kernel.variance();
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = kernel(times[i], times[j]);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Eigen::MatrixXd gram(const CovKernel& kernel, std::span<const Point2> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j, j) = kernel.variance();
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = kernel(points[i], points[j]);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Eigen::MatrixXd cross_gram(const CovKernel& kernel, std::span<const Point2> rows,
                           std::span<const Point2> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      out(i, j) = kernel(rows[i], cols[j]);
    }
  }
  return out;
}

}  // namespace bsfr
