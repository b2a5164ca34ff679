#pragma once

namespace bsfr {

/// P(X >= h, Y >= k) for standard bivariate normal (X, Y) with correlation r.
/// Drezner-Wesolowsky / Genz Gauss-Legendre scheme, absolute error below 1e-15
/// in double precision for |r| < 1; r = +-1 uses the degenerate closed form.
double bvn_upper(double h, double k, double r);

/// P(X < h, Y < k).
inline double bvn_cdf(double h, double k, double r) { return bvn_upper(-h, -k, r); }

struct Orthants {
  double ll = 0.0;  // P(g_i <  c, g_j <  c)
  double lg = 0.0;  // P(g_i <  c, g_j >= c)
  double gl = 0.0;  // P(g_i >= c, g_j <  c)
  double gg = 0.0;  // P(g_i >= c, g_j >= c)
};

/// Quadrant probabilities of (g_i, g_j) ~ N((mu_i, mu_j), [[s_i^2, rho s_i s_j], [., s_j^2]])
/// around the threshold c.
Orthants binorm_orthant(double mu_i, double mu_j, double sigma_i, double sigma_j, double rho,
                        double c);

}  // namespace bsfr
