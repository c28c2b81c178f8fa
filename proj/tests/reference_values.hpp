#pragma once

// Reference values frozen from tests/oracle/reference_oracles.py.
// Regenerate with: python3 tests/oracle/reference_oracles.py
// These are intentionally computed by routes that share no code with the
// library (closed-form transcendental roots, dense FD bisection, constrained
// optimization over a Hermite basis).

namespace mgpe::ref {

// integral_0^1 sqrt(1/2 + 2 s^2) ds, quadrature, cross-checked against the closed form
inline constexpr double kRefTransformF1Delta1 = 1.045770523557195;

// free-boundary radius, -rho''+rho = mu-x^2/2, d=1, delta_inf=1; transcendental root, FD-bisection checked
inline constexpr double kRefCase2X0Delta1 = 1.984735113399849;

// multiplier for the same problem, mu = x0^2/6 + 1/(2 x0)
inline constexpr double kRefCase2MuDelta1 = 0.90845169811011768;

// free-boundary radius, -rho''-rho = mu-x^2/2, d=1, delta_inf=1; transcendental root, FD-bisection checked
inline constexpr double kRefCase2pX0Delta1 = 1.7392751277568523;

// multiplier for the same problem, mu = x0^2/6 - 1/(2 x0)
inline constexpr double kRefCase2pMuDelta1 = 0.21670357923966904;

// first positive root of tan R = R beyond pi (d=3 compact-support radius)
inline constexpr double kRefTanRootD3 = 4.4934094579090642;

// ground energy, d=1 harmonic, beta=10, delta=1; constrained optimization over 16 even Hermite modes
inline constexpr double kRefEnergyBeta10Delta1 = 1.9828323224670164;

// Convergence of the Hermite oracle: K=8: 1.982833833951, K=12: 1.982832366806, K=16: 1.982832322467
inline constexpr double kRefEnergyBeta10Delta1Tol = 2e-5;

}  // namespace mgpe::ref
