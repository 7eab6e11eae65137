#pragma once

#include "steer/leadfield.hpp"
#include "steer/types.hpp"

namespace steer {

/// Gamma: current density along the target orientation produced at the
/// target, x1.(L1 y) / |x1|_2. Fixed summation order, bit reproducible.
[[nodiscard]] double focused_density(const ReducedSystem& system, const CurrentPattern& pattern);

/// Xi: root mean square nuisance density, |L2 y|_2 / sqrt(M). Requires a
/// nonempty nuisance block.
[[nodiscard]] double nuisance_density(const ReducedSystem& system, const CurrentPattern& pattern);

/// Theta = gamma / xi. Conventions at xi == 0: +inf for gamma > 0, -inf for
/// gamma < 0, 0 when both vanish.
[[nodiscard]] double field_ratio(double gamma, double xi);

[[nodiscard]] DecisionVariables decision_variables(const ReducedSystem& system,
                                                   const CurrentPattern& pattern);

}  // namespace steer
