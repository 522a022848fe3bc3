#pragma once

// Short-time propagators for i d/dt psi = H(t) psi on tridiagonal chains.

#include <functional>

#include <Eigen/Dense>

#include "core/model.hpp"

namespace oampump {

using HamiltonianFn = std::function<ChainHamiltonian(double)>;

/// exp(-i h H) v by a scaled Taylor series (exact to roundoff for the small,
/// well-conditioned chains used here).
Eigen::VectorXcd expmv(const ChainHamiltonian& H, double h, const Eigen::VectorXcd& v);

/// One commutator-free fourth-order Magnus step t -> t + h.
void magnus4_step(const HamiltonianFn& H, double t, double h, Eigen::VectorXcd& psi);

/// Uniform substeps of length <= `max_step` from t0 to t1 that never straddle
/// a point in `breaks`. Returned as the list of step end points (t0 excluded).
std::vector<double> step_grid(double t0, double t1, double max_step,
                              const std::vector<double>& breaks, bool even_count = false);

/// Same, with steps shrinking like max_step * (d / width)^(2/3) at distance
/// d < width from each singular point.
std::vector<double> step_grid(double t0, double t1, double max_step,
                              const std::vector<double>& breaks,
                              const std::vector<SingularPoint>& singular);

}  // namespace oampump
