#include "bsfr/normal.hpp"

#include <boost/math/special_functions/erf.hpp>

#include "bsfr/errors.hpp"

namespace bsfr {

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("norm_quantile: probability must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace bsfr
