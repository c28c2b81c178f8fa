#pragma once

#include <stdexcept>
#include <string>

namespace mgpe {

// Base class for everything thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid grid/solver/experiment configuration (bad sizes, unknown keys, ...).
class config_error : public error {
public:
    explicit config_error(const std::string& what) : error(what) {}
};

// Parameter regime in which no ground state exists (delta < 0, and the
// delta = 0 attractive thresholds). Distinct from config_error so callers can
// suggest the divergence probe instead of retrying.
class nonexistence_error : public error {
public:
    explicit nonexistence_error(const std::string& what) : error(what) {}
};

// Root bracketing failed or produced an unphysical (sign-changing) profile.
class bracket_error : public error {
public:
    explicit bracket_error(const std::string& what) : error(what) {}
};

// The gradient flow hit max_iterations without satisfying both stopping
// criteria. Carries a compact diagnostic of the final state.
class nonconvergence_error : public error {
public:
    nonconvergence_error(const std::string& what, int iterations, double last_energy,
                         double last_residual)
        : error(what), iterations(iterations), last_energy(last_energy),
          last_residual(last_residual) {}

    int iterations;
    double last_energy;
    double last_residual;
};

}  // namespace mgpe
