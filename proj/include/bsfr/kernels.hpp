#pragma once

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace bsfr {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(const Point2& a, const Point2& b);

enum class KernelFamily { SquaredExponential, Matern12, Matern52 };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Stationary isotropic covariance function k(r) with signal scale s and
/// length-scale l:
///   SE:          s^2 exp(-r^2 / (2 l^2))
///   Matern-1/2:  s^2 exp(-r / l)
///   Matern-5/2:  s^2 (1 + sqrt5 r / l + 5 r^2 / (3 l^2)) exp(-sqrt5 r / l)
class CovKernel {
 public:
  CovKernel(KernelFamily family, double scale, double length_scale);

  double at_distance(double r) const;
  double operator()(double t, double t_prime) const;
  double operator()(const Point2& a, const Point2& b) const;

  KernelFamily family() const { return family_; }
  double scale() const { return scale_; }
  double length_scale() const { return length_scale_; }
  double variance() const { return scale_ * scale_; }

  friend bool operator==(const CovKernel&, const CovKernel&) = default;

 private:
  KernelFamily family_;
  double scale_;
  double length_scale_;
};

Eigen::MatrixXd gram(const CovKernel& kernel, std::span<const double> times);
Eigen::MatrixXd gram(const CovKernel& kernel, std::span<const Point2> points);
Eigen::MatrixXd cross_gram(const CovKernel& kernel, std::span<const Point2> rows,
                           std::span<const Point2> cols);

}  // namespace bsfr
