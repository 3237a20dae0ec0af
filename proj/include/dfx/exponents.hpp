// Conversions between the exponent eta in (0, 1) and the criterion
// coefficient alpha = 1/(1-eta) - 1, together with the eta-perturbation used
// by the weight-perturbation lemma.

#pragma once

#include "dfx/types.hpp"

namespace dfx {

inline double alpha_from_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw PreconditionError("alpha_from_eta: eta must lie in (0, 1)");
  return eta / (1.0 - eta);
}

inline double eta_from_alpha(double alpha) {
  if (!(alpha > 0.0))
    throw PreconditionError("eta_from_alpha: alpha must be positive");
  return alpha / (1.0 + alpha);
}

// eta~ = 1 - 1/(1/(1-eta) - nu), defined for 0 <= nu < alpha(eta).
inline double perturb_eta(double eta, double nu) {
  double alpha = alpha_from_eta(eta);
  if (!(nu >= 0.0 && nu < alpha))
    throw PreconditionError("perturb_eta: need 0 <= nu < 1/(1-eta) - 1");
  return 1.0 - 1.0 / (1.0 / (1.0 - eta) - nu);
}

}  // namespace dfx
