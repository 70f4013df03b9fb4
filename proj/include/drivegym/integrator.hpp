#pragma once

#include <functional>
#include <string_view>

#include "drivegym/state_vec.hpp"

namespace drivegym {

enum class IntegratorMethod { Euler, Rk4, DormandPrince };

std::string_view integrator_name(IntegratorMethod m);  // "euler", "rk4", "dopri5"
IntegratorMethod integrator_from_name(std::string_view name);

struct IntegratorChoice {
    IntegratorMethod method{IntegratorMethod::Rk4};
    double tau{1e-4};
    double rtol{1e-6};
    double atol{1e-8};

    void validate() const;
};

/// Autonomous right-hand side; the input voltage is held constant over the
/// step, so time does not enter.
using Rhs = std::function<StateVec(const StateVec&)>;

/// Advances the state by exactly choice.tau. The Dormand-Prince method
/// substeps adaptively and always lands on t + tau.
/// Throws NumericalError on non-finite intermediates or when the adaptive
/// step size collapses below tau * 1e-12.
StateVec step_ode(const IntegratorChoice& choice, const Rhs& rhs, const StateVec& state);

}  // namespace drivegym
