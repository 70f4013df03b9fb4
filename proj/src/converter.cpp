#include "drivegym/converter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drivegym/errors.hpp"

namespace drivegym {

namespace {

double signum(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

bool duty_is_bipolar(Topology t) { return t == Topology::FourQuadrant || t == Topology::B6; }

std::size_t channel_count(const ConverterSpec& spec, std::size_t dc_channels)
{
    return spec.topology == Topology::B6 ? 3 : dc_channels;
}

double single_channel_discrete(Topology t, int command, double u_sup, double current)
{
    switch (t) {
    case Topology::OneQuadrant: return command == 1 ? u_sup : 0.0;
    case Topology::TwoQuadrant:
        if (command == 1) return u_sup;
        if (command == 2) return current < 0.0 ? u_sup : 0.0;
        return 0.0;
    case Topology::FourQuadrant: {
        const double leg_a = (command & 1) ? 1.0 : 0.0;
        const double leg_b = (command & 2) ? 1.0 : 0.0;
        return u_sup * (leg_a - leg_b);
    }
    case Topology::B6: break;
    }
    return 0.0;
}

}  // namespace

std::string_view topology_name(Topology t)
{
    switch (t) {
    case Topology::OneQuadrant: return "1QC";
    case Topology::TwoQuadrant: return "2QC";
    case Topology::FourQuadrant: return "4QC";
    case Topology::B6: return "B6";
    }
    return "?";
}

Topology topology_from_name(std::string_view name)
{
    for (auto t : {Topology::OneQuadrant, Topology::TwoQuadrant, Topology::FourQuadrant, Topology::B6}) {
        if (topology_name(t) == name) return t;
    }
    throw ConfigError("unknown converter topology '" + std::string(name) + "'");
}

int switching_states(Topology t)
{
    switch (t) {
    case Topology::OneQuadrant: return 2;
    case Topology::TwoQuadrant: return 3;
    case Topology::FourQuadrant: return 4;
    case Topology::B6: return 8;
    }
    return 0;
}

ActionSpace action_space(const ConverterSpec& spec, std::size_t dc_channels)
{
    if (dc_channels < 1 || dc_channels > 2) throw ConfigError("DC converter composition supports 1 or 2 channels");
    if (spec.topology == Topology::B6 && dc_channels != 1) {
        throw ConfigError("B6 bridge cannot be composed with a DC channel pair");
    }
    ActionSpace space;
    space.mode = spec.mode;
    if (spec.mode == ActionMode::Discrete) {
        int card = switching_states(spec.topology);
        if (spec.topology != Topology::B6 && dc_channels == 2) card *= card;
        space.cardinality = card;
        space.channels = 1;
        space.low = 0.0;
        space.high = card - 1;
    } else {
        space.channels = channel_count(spec, dc_channels);
        space.low = duty_is_bipolar(spec.topology) ? -1.0 : 0.0;
        space.high = 1.0;
    }
    return space;
}

VoltageRange voltage_range(const ConverterSpec& spec)
{
    switch (spec.topology) {
    case Topology::OneQuadrant:
    case Topology::TwoQuadrant: return {0.0, spec.u_sup};
    case Topology::FourQuadrant: return {-spec.u_sup, spec.u_sup};
    case Topology::B6: return {-0.5 * spec.u_sup, 0.5 * spec.u_sup};
    }
    return {0.0, 0.0};
}

ConversionResult convert_continuous(const ConverterSpec& spec, double tau, std::span<const double> duty,
                                    std::span<const double> current)
{
    if (duty.size() != current.size()) throw InputError("duty and current channel counts differ");
    if (duty.empty() || duty.size() > StateVec::kCapacity) throw InputError("invalid duty channel count");

    const double lo = duty_is_bipolar(spec.topology) ? -1.0 : 0.0;
    const double scale = spec.topology == Topology::B6 ? 0.5 * spec.u_sup : spec.u_sup;
    const double interlock =
        spec.topology == Topology::OneQuadrant ? 0.0 : spec.u_sup * (spec.interlocking_time / tau);
    const auto range = voltage_range(spec);

    ConversionResult out{StateVec(duty.size()), false};
    for (std::size_t k = 0; k < duty.size(); ++k) {
        if (std::isnan(duty[k])) throw InputError("duty cycle is NaN");
        const double d = std::clamp(duty[k], lo, 1.0);
        if (d != duty[k]) out.clamped = true;
        const double u = d * scale - interlock * signum(current[k]);
        out.voltage[k] = std::clamp(u, range.low, range.high);
    }
    return out;
}

StateVec convert_discrete(const ConverterSpec& spec, int command, std::span<const double> current,
                          std::size_t dc_channels)
{
    const auto space = action_space(ConverterSpec{spec.topology, ActionMode::Discrete, spec.u_sup}, dc_channels);
    if (command < 0 || command >= space.cardinality) {
        throw InputError("switching command " + std::to_string(command) + " outside [0, " +
                         std::to_string(space.cardinality) + ")");
    }
    if (spec.topology == Topology::B6) {
        if (current.size() != 3) throw InputError("B6 needs three phase currents");
        StateVec u(3);
        for (std::size_t k = 0; k < 3; ++k) u[k] = (command >> k) & 1 ? 0.5 * spec.u_sup : -0.5 * spec.u_sup;
        return u;
    }
    if (current.size() != dc_channels) throw InputError("current channel count mismatch");
    const int card = switching_states(spec.topology);
    StateVec u(dc_channels);
    int rest = command;
    for (std::size_t k = dc_channels; k-- > 0;) {
        u[k] = single_channel_discrete(spec.topology, rest % card, spec.u_sup, current[k]);
        rest /= card;
    }
    return u;
}

Action zero_action(const ConverterSpec& spec, std::size_t dc_channels)
{
    if (spec.mode == ActionMode::Discrete) return Action{0};
    return Action{StateVec(channel_count(spec, dc_channels))};
}

Action ActionBuffer::push(const Action& action)
{
    if (!dead_time_) return action;
    Action applied = pending_;
    pending_ = action;
    return applied;
}

}  // namespace drivegym
