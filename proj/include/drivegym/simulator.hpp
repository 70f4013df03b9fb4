#pragma once

#include <span>
#include <vector>

#include "drivegym/config.hpp"
#include "drivegym/converter.hpp"
#include "drivegym/state_vec.hpp"

namespace drivegym {

/// Converter + motor + load + integrator for one configuration. Stateless:
/// the caller owns the motor state and the dead-time buffer.
class DriveSimulator {
public:
    explicit DriveSimulator(const EnvConfig& cfg);

    struct Voltages {
        StateVec u;
        bool clamped{false};
    };

    /// Input voltages produced by an (already delayed) action. Continuous
    /// actions are checked against the channel count; discrete commands
    /// against the cardinality.
    [[nodiscard]] Voltages voltages(const Action& applied, const StateVec& state) const;

    /// One sampling period with zero-order-hold input. The PMSM's mechanical
    /// angle is wrapped into [0, 2pi).
    [[nodiscard]] StateVec advance(const StateVec& state, std::span<const double> u_in) const;

    [[nodiscard]] std::vector<double> env_vector(const StateVec& state, std::span<const double> u_in) const;

    [[nodiscard]] const ActionSpace& action_space() const { return space_; }
    [[nodiscard]] const EnvConfig& config() const { return cfg_; }

private:
    EnvConfig cfg_;
    ActionSpace space_;
};

/// Entries that cannot be negative for the motor/converter pairing. They are
/// normalized to [0, 1] instead of [-1, 1].
std::vector<bool> nonnegative_entries(MotorKind kind, Topology topology);

}  // namespace drivegym
