#pragma once

#include <string>
#include <utility>
#include <variant>

namespace bsfr {

/// output = offset + slope * raw
struct AffineMap {
  double offset = 0.0;
  double slope = 1.0;

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

struct IdentityWarp {
  friend bool operator==(const IdentityWarp&, const IdentityWarp&) = default;
};

/// Gamma(shape, scale) marginal, optionally followed by an affine map.
struct GammaWarp {
  double shape = 1.0;
  double scale = 1.0;
  AffineMap post_map{};

  friend bool operator==(const GammaWarp&, const GammaWarp&) = default;
};

/// Which tail exponent multiplies h in the Tukey g-and-h map.
enum class TailConvention {
  Half,  // exp(h z^2 / 2), the usual Tukey parameterization
  Full,  // exp(h z^2)
};

/// Tukey g-and-h: tau(z) = loc + scale * (exp(g z) - 1) / g * exp(c h z^2)
/// with c = 1/2 (Half) or 1 (Full).
struct TukeyGHWarp {
  double g = 0.0;
  double h = 0.0;
  double loc = 0.0;
  double scale = 1.0;
  TailConvention tail = TailConvention::Half;

  double tail_exponent() const { return tail == TailConvention::Half ? 0.5 * h : h; }

  friend bool operator==(const TukeyGHWarp&, const TukeyGHWarp&) = default;
};

/// Value and derivatives of the inverse warp G at a point v.
struct InverseJet {
  double value = 0.0;        // G(v)
  double deriv = 1.0;        // G'(v)
  double second = 0.0;       // G''(v)
  double log_deriv = 0.0;    // log G'(v)
  double dlog_deriv = 0.0;   // d/dv log G'(v)
  double d2log_deriv = 0.0;  // d^2/dv^2 log G'(v)
};

/// Strictly increasing warp W = F^{-1} o Phi together with its inverse
/// G = Phi^{-1} o F.
///
/// For a Gamma warp whose post map has a negative slope (the reflected
/// x -> c0 - x case) the forward map is W(z) = c0 + c1 F^{-1}(Phi(-z)). Because
/// the latent process is a zero-mean Gaussian, z and -z have the same law, so
/// the warped process is unchanged while W stays increasing and G o W = id.
class WarpSpec {
 public:
  using Family = std::variant<IdentityWarp, GammaWarp, TukeyGHWarp>;

  WarpSpec() = default;
  explicit WarpSpec(Family family);

  static WarpSpec identity();
  static WarpSpec gamma(double shape, double scale, AffineMap post_map = {});
  static WarpSpec tukey_gh(double g, double h, double loc, double scale,
                           TailConvention tail = TailConvention::Half);

  double forward(double z) const;
  /// G(v); throws DomainError unless v lies strictly inside range(W).
  double inverse(double v) const;
  double log_dG(double v) const;
  InverseJet inverse_jet(double v) const;

  /// Open interval (lo, hi) that W maps the real line onto.
  std::pair<double, double> range() const;
  bool in_range(double v) const;

  const Family& family() const { return family_; }
  std::string name() const;

  friend bool operator==(const WarpSpec&, const WarpSpec&) = default;

 private:
  Family family_{IdentityWarp{}};
};

/// y = 1{g >= c} with c = Phi^{-1}(1 - pi).
class BernoulliThreshold {
 public:
  static BernoulliThreshold from_pi(double pi);
  static BernoulliThreshold from_c(double c);

  double c() const { return c_; }
  /// Success probability for a standard normal latent value.
  double pi() const { return pi_; }
  int apply(double g) const { return g >= c_ ? 1 : 0; }

 private:
  BernoulliThreshold(double c, double pi) : c_(c), pi_(pi) {}
  double c_;
  double pi_;
};

}  // namespace bsfr
