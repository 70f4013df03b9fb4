#include "drivegym/simulator.hpp"

#include <cmath>
#include <numbers>

#include "drivegym/errors.hpp"
#include "drivegym/integrator.hpp"
#include "drivegym/motor.hpp"

namespace drivegym {

DriveSimulator::DriveSimulator(const EnvConfig& cfg)
    : cfg_(cfg), space_(drivegym::action_space(cfg.converter, cfg.dc_channels()))
{
}

DriveSimulator::Voltages DriveSimulator::voltages(const Action& applied, const StateVec& state) const
{
    const StateVec currents = channel_currents(cfg_.motor, state);
    if (const auto* duty = std::get_if<StateVec>(&applied)) {
        if (duty->size() != space_.channels) {
            throw InputError("continuous action needs " + std::to_string(space_.channels) + " channel(s), got " +
                             std::to_string(duty->size()));
        }
        auto r = convert_continuous(cfg_.converter, cfg_.tau(), duty->span(), currents.span());
        return {r.voltage, r.clamped};
    }
    const int command = std::get<int>(applied);
    return {convert_discrete(cfg_.converter, command, currents.span(), cfg_.dc_channels()), false};
}

StateVec DriveSimulator::advance(const StateVec& state, std::span<const double> u_in) const
{
    const StateVec u(u_in);
    const auto& motor = cfg_.motor;
    const auto& load = cfg_.load;
    StateVec next = step_ode(
        cfg_.integrator, [&](const StateVec& x) { return motor_derivative(motor, x, u.span(), load); }, state);
    if (motor.kind == MotorKind::Pmsm) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double& eps = next[state_index::kEpsMe];
        eps = std::fmod(eps, two_pi);
        if (eps < 0.0) eps += two_pi;
    }
    return next;
}

std::vector<double> DriveSimulator::env_vector(const StateVec& state, std::span<const double> u_in) const
{
    return env_state_vector(cfg_.motor, state, u_in, cfg_.converter.u_sup);
}

std::vector<bool> nonnegative_entries(MotorKind kind, Topology topology)
{
    const bool one_q = topology == Topology::OneQuadrant;
    const bool unipolar_u = one_q || topology == Topology::TwoQuadrant;
    const bool series = kind == MotorKind::Series;
    const auto& entries = env_entries(kind);
    std::vector<bool> out(entries.size(), false);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        switch (entries[k].role) {
        case EntryRole::Speed: out[k] = is_dc(kind) && (series || unipolar_u); break;
        case EntryRole::Torque: out[k] = is_dc(kind) && (series || one_q); break;
        case EntryRole::Current: out[k] = is_dc(kind) && one_q; break;
        case EntryRole::Voltage: out[k] = is_dc(kind) && unipolar_u; break;
        case EntryRole::Supply:
        case EntryRole::Angle: out[k] = true; break;
        }
    }
    return out;
}

}  // namespace drivegym
