#include "bsfr/warping.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "bsfr/errors.hpp"
#include "bsfr/normal.hpp"

namespace bsfr {

namespace {

constexpr double kProbClamp = 1e-16;
constexpr double kInf = std::numeric_limits<double>::infinity();

void warn_clamped_once() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    std::cerr << "warning: Phi(z) saturated in a warp evaluation; clamped to [1e-16, 1-1e-16]\n";
  });
}

// ---------------------------------------------------------------- Gamma

double gamma_quantile_of_latent(const GammaWarp& w, double z) {
  // F^{-1}(Phi(z)); the upper tail goes through the complementary function.
  double tail = norm_cdf(-std::abs(z));
  if (tail < kProbClamp) {
    warn_clamped_once();
    tail = kProbClamp;
  }
  const double x = z <= 0.0 ? boost::math::gamma_p_inv(w.shape, tail)
                            : boost::math::gamma_q_inv(w.shape, tail);
  return x * w.scale;
}

double gamma_log_density(const GammaWarp& w, double x) {
  return (w.shape - 1.0) * std::log(x) - x / w.scale - std::lgamma(w.shape) -
         w.shape * std::log(w.scale);
}

double gamma_raw(const GammaWarp& w, double v) {
  const double x = (v - w.post_map.offset) / w.post_map.slope;
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << "value " << v << " lies outside the range of the Gamma warp";
    throw DomainError(msg.str());
  }
  return x;
}

// Phi^{-1}(F(x)) computed from whichever tail is smaller.
double gamma_latent(const GammaWarp& w, double x) {
  const double p = boost::math::gamma_p(w.shape, x / w.scale);
  if (p <= 0.5) {
    if (p <= 0.0) throw DomainError("Gamma warp: CDF underflow");
    return norm_quantile(p);
  }
  const double q = boost::math::gamma_q(w.shape, x / w.scale);
  if (q <= 0.0) throw DomainError("Gamma warp: CDF overflow");
  return -norm_quantile(q);
}

InverseJet gamma_jet(const GammaWarp& w, double v) {
  const double x = gamma_raw(w, v);
  const double slope = w.post_map.slope;
  const double t = 1.0 / slope;  // dx/dv
  const double u = gamma_latent(w, x);
  InverseJet jet;
  jet.value = slope > 0.0 ? u : -u;
  jet.log_deriv = gamma_log_density(w, x) - std::log(std::abs(slope)) - norm_logpdf(u);
  jet.deriv = std::exp(jet.log_deriv);
  const double dlogf = (w.shape - 1.0) / x - 1.0 / w.scale;
  const double d2logf = -(w.shape - 1.0) / (x * x);
  jet.dlog_deriv = dlogf * t + jet.value * jet.deriv;
  jet.second = jet.deriv * jet.dlog_deriv;
  jet.d2log_deriv = d2logf * t * t + jet.deriv * jet.deriv + jet.value * jet.second;
  return jet;
}

// ---------------------------------------------------------------- Tukey g-and-h

struct TauDerivs {
  double d0, d1, d2, d3;
};

TauDerivs tau_derivs(const TukeyGHWarp& w, double z) {
  double u, u1, u2, u3;
  if (w.g == 0.0) {
    u = z;
    u1 = 1.0;
    u2 = 0.0;
    u3 = 0.0;
  } else {
    const double egz = std::exp(w.g * z);
    u = std::expm1(w.g * z) / w.g;
    u1 = egz;
    u2 = w.g * egz;
    u3 = w.g * w.g * egz;
  }
  const double h = w.tail_exponent();
  const double e = std::exp(h * z * z);
  const double e1 = 2.0 * h * z * e;
  const double e2 = (2.0 * h + 4.0 * h * h * z * z) * e;
  const double e3 = (12.0 * h * h * z + 8.0 * h * h * h * z * z * z) * e;
  return {w.loc + w.scale * u * e, w.scale * (u1 * e + u * e1),
          w.scale * (u2 * e + 2.0 * u1 * e1 + u * e2),
          w.scale * (u3 * e + 3.0 * u2 * e1 + 3.0 * u1 * e2 + u * e3)};
}

double tau(const TukeyGHWarp& w, double z) {
  const double u = w.g == 0.0 ? z : std::expm1(w.g * z) / w.g;
  return w.loc + w.scale * u * std::exp(w.tail_exponent() * z * z);
}

std::pair<double, double> tukey_range(const TukeyGHWarp& w) {
  if (w.h > 0.0 || w.g == 0.0) return {-kInf, kInf};
  // h == 0: shifted, scaled lognormal-type map with one finite end.
  const double bound = w.loc - w.scale / w.g;
  return w.g > 0.0 ? std::pair{bound, kInf} : std::pair{-kInf, bound};
}

// tau^{-1}(v): bracket expanded geometrically from z = 0, then Newton steps
// that fall back to bisection whenever they leave the bracket.
double tukey_inverse(const TukeyGHWarp& w, double v) {
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; i < 64 && tau(w, lo) > v; ++i) lo *= 2.0;
  for (int i = 0; i < 64 && tau(w, hi) < v; ++i) hi *= 2.0;
  if (!(tau(w, lo) <= v && tau(w, hi) >= v)) {
    throw DomainError("Tukey g-and-h inverse: could not bracket the target value");
  }
  const double tol = 1e-13 * std::max(1.0, std::abs(v));
  double z = 0.5 * (lo + hi);
  if (0.0 > lo && 0.0 < hi) z = 0.0;
  for (int it = 0; it < 200; ++it) {
    const TauDerivs d = tau_derivs(w, z);
    const double r = d.d0 - v;
    if (std::abs(r) <= tol) return z;
    if (r > 0.0) {
      hi = z;
    } else {
      lo = z;
    }
    double next = z - r / d.d1;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z))) {
      return next;
    }
    z = next;
  }
  return z;
}

InverseJet tukey_jet(const TukeyGHWarp& w, double v) {
  const double z = tukey_inverse(w, v);
  const TauDerivs d = tau_derivs(w, z);
  InverseJet jet;
  jet.value = z;
  jet.deriv = 1.0 / d.d1;
  jet.log_deriv = -std::log(d.d1);
  jet.dlog_deriv = -d.d2 / (d.d1 * d.d1);
  jet.second = -d.d2 / (d.d1 * d.d1 * d.d1);
  const double d1sq = d.d1 * d.d1;
  jet.d2log_deriv = -d.d3 / (d1sq * d.d1) + 2.0 * d.d2 * d.d2 / (d1sq * d1sq);
  return jet;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

WarpSpec::WarpSpec(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{[](const IdentityWarp&) {},
                        [](const GammaWarp& w) {
                          if (!(w.shape > 0.0) || !(w.scale > 0.0)) {
                            throw DomainError("Gamma warp: shape and scale must be positive");
                          }
                          if (w.post_map.slope == 0.0 || !std::isfinite(w.post_map.slope)) {
                            throw DomainError("Gamma warp: post-map slope must be nonzero");
                          }
                        },
                        [](const TukeyGHWarp& w) {
                          if (!(w.h >= 0.0) || !(w.scale > 0.0)) {
                            throw DomainError("Tukey g-and-h warp: need h >= 0 and scale > 0");
                          }
                        }},
             family_);
}

WarpSpec WarpSpec::identity() { return WarpSpec(IdentityWarp{}); }

WarpSpec WarpSpec::gamma(double shape, double scale, AffineMap post_map) {
  return WarpSpec(GammaWarp{shape, scale, post_map});
}

WarpSpec WarpSpec::tukey_gh(double g, double h, double loc, double scale, TailConvention tail) {
  return WarpSpec(TukeyGHWarp{g, h, loc, scale, tail});
}

double WarpSpec::forward(double z) const {
  return std::visit(Overloaded{[&](const IdentityWarp&) { return z; },
                               [&](const GammaWarp& w) {
                                 const double zz = w.post_map.slope > 0.0 ? z : -z;
                                 return w.post_map.offset +
                                        w.post_map.slope * gamma_quantile_of_latent(w, zz);
                               },
                               [&](const TukeyGHWarp& w) { return tau(w, z); }},
                    family_);
}

double WarpSpec::inverse(double v) const {
  if (!in_range(v)) {
    std::ostringstream msg;
    msg << "value " << v << " lies outside the open range of warp " << name();
    throw DomainError(msg.str());
  }
  return std::visit(Overloaded{[&](const IdentityWarp&) { return v; },
                               [&](const GammaWarp& w) {
                                 const double u = gamma_latent(w, gamma_raw(w, v));
                                 return w.post_map.slope > 0.0 ? u : -u;
                               },
                               [&](const TukeyGHWarp& w) { return tukey_inverse(w, v); }},
                    family_);
}

double WarpSpec::log_dG(double v) const { return inverse_jet(v).log_deriv; }

InverseJet WarpSpec::inverse_jet(double v) const {
  if (!in_range(v)) {
    std::ostringstream msg;
    msg << "value " << v << " lies outside the open range of warp " << name();
    throw DomainError(msg.str());
  }
  return std::visit(Overloaded{[&](const IdentityWarp&) {
                                 InverseJet jet;
                                 jet.value = v;
                                 return jet;
                               },
                               [&](const GammaWarp& w) { return gamma_jet(w, v); },
                               [&](const TukeyGHWarp& w) { return tukey_jet(w, v); }},
                    family_);
}

std::pair<double, double> WarpSpec::range() const {
  return std::visit(Overloaded{[](const IdentityWarp&) { return std::pair{-kInf, kInf}; },
                               [](const GammaWarp& w) {
                                 return w.post_map.slope > 0.0
                                            ? std::pair{w.post_map.offset, kInf}
                                            : std::pair{-kInf, w.post_map.offset};
                               },
                               [](const TukeyGHWarp& w) { return tukey_range(w); }},
                    family_);
}

bool WarpSpec::in_range(double v) const {
  const auto [lo, hi] = range();
  return std::isfinite(v) && v > lo && v < hi;
}

std::string WarpSpec::name() const {
  return std::visit(Overloaded{[](const IdentityWarp&) { return std::string("identity"); },
                               [](const GammaWarp&) { return std::string("gamma"); },
                               [](const TukeyGHWarp&) { return std::string("tukey_gh"); }},
                    family_);
}

BernoulliThreshold BernoulliThreshold::from_pi(double pi) {
  if (!(pi > 0.0 && pi < 1.0)) {
    throw DomainError("BernoulliThreshold: pi must lie in (0, 1)");
  }
  return BernoulliThreshold(norm_quantile(1.0 - pi), pi);
}

BernoulliThreshold BernoulliThreshold::from_c(double c) {
  return BernoulliThreshold(c, 1.0 - norm_cdf(c));
}

}  // namespace bsfr
