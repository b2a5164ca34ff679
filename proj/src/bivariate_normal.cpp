#include "bsfr/bivariate_normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "bsfr/errors.hpp"
#include "bsfr/normal.hpp"

namespace bsfr {

namespace {

// Half sets of the 6, 12 and 20 point Gauss-Legendre rules on [-1, 1].
constexpr std::array<double, 3> kW6{0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 3> kX6{-0.9324695142031522, -0.6612093864662647,
                                    -0.2386191860831970};
constexpr std::array<double, 6> kW12{0.04717533638651177, 0.1069393259953183,
                                     0.1600783285433464,  0.2031674267230659,
                                     0.2334925365383547,  0.2491470458134029};
constexpr std::array<double, 6> kX12{-0.9815606342467191, -0.9041172563704750,
                                     -0.7699026741943050, -0.5873179542866171,
                                     -0.3678314989981802, -0.1252334085114692};
constexpr std::array<double, 10> kW20{0.01761400713915212, 0.04060142980038694,
                                      0.06267204833410906, 0.08327674157670475,
                                      0.1019301198172404,  0.1181945319615184,
                                      0.1316886384491766,  0.1420961093183821,
                                      0.1491729864726037,  0.1527533871307259};
constexpr std::array<double, 10> kX20{-0.9931285991850949, -0.9639719272779138,
                                      -0.9122344282513259, -0.8391169718222188,
                                      -0.7463319064601508, -0.6360536807265150,
                                      -0.5108670019508271, -0.3737060887154196,
                                      -0.2277858511416451, -0.07652652113349733};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <std::size_t N>
double bvn_upper_rule(double h, double k, double r, const std::array<double, N>& w,
                      const std::array<double, N>& x) {
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < N; ++i) {
      double sn = std::sin(asr * (1.0 - x[i]) / 2.0);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 + x[i]) / 2.0);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + norm_cdf(-h) * norm_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double xs = std::pow(a * (sgn * x[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        const double asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          const double sp = 1.0 + c * xs * (1.0 + d * xs);
          const double ep = std::exp(-hk * xs / (2.0 * std::pow(1.0 + rs, 2))) / rs;
          bvn += a * w[i] * std::exp(asr) * (ep - sp);
        }
      }
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
  if (h >= k) return -bvn;
  const double l = h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
  return l - bvn;
}

}  // namespace

double bvn_upper(double h, double k, double r) {
  if (!(std::abs(r) <= 1.0)) throw DomainError("bivariate normal: |rho| must not exceed 1");
  if (r == 1.0) return norm_cdf(-std::max(h, k));
  if (r == -1.0) return std::max(0.0, norm_cdf(-h) - norm_cdf(k));
  const double ar = std::abs(r);
  double p;
  if (ar < 0.3) {
    p = bvn_upper_rule(h, k, r, kW6, kX6);
  } else if (ar < 0.75) {
    p = bvn_upper_rule(h, k, r, kW12, kX12);
  } else {
    p = bvn_upper_rule(h, k, r, kW20, kX20);
  }
  return std::clamp(p, 0.0, 1.0);
}

Orthants binorm_orthant(double mu_i, double mu_j, double sigma_i, double sigma_j, double rho,
                        double c) {
  if (!(sigma_i > 0.0) || !(sigma_j > 0.0)) {
    throw DomainError("binorm_orthant: standard deviations must be positive");
  }
  const double a = (c - mu_i) / sigma_i;
  const double b = (c - mu_j) / sigma_j;
  Orthants o;
  const double upper_i = norm_cdf(-a);
  const double upper_j = norm_cdf(-b);
  o.gg = std::min(bvn_upper(a, b, rho), std::min(upper_i, upper_j));
  o.gl = upper_i - o.gg;
  o.lg = upper_j - o.gg;
  o.ll = 1.0 - o.gg - o.gl - o.lg;
  return o;
}

}  // namespace bsfr
