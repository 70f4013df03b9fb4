#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "drivegym/state_vec.hpp"

namespace drivegym {

enum class Topology { OneQuadrant, TwoQuadrant, FourQuadrant, B6 };
enum class ActionMode { Discrete, Continuous };

std::string_view topology_name(Topology t);  // "1QC", "2QC", "4QC", "B6"
Topology topology_from_name(std::string_view name);

struct ConverterSpec {
    Topology topology{Topology::OneQuadrant};
    ActionMode mode{ActionMode::Continuous};
    double u_sup{420.0};
    double interlocking_time{0.0};  // seconds
    bool dead_time{false};          // one sampling step of delay
};

/// Discrete commands carry an integer switching state, continuous actions a
/// duty cycle per channel.
using Action = std::variant<int, StateVec>;

struct ActionSpace {
    ActionMode mode{ActionMode::Continuous};
    int cardinality{0};        // discrete only
    std::size_t channels{1};   // continuous only
    double low{0.0};           // per-channel duty range
    double high{1.0};
};

/// Number of switching states of one converter: 1QC 2, 2QC 3, 4QC 4, B6 8.
int switching_states(Topology t);

/// dc_channels is the number of identical DC converters (2 for the
/// externally excited motor's armature + excitation pair). Discrete
/// compositions multiply cardinalities. B6 always has three phase channels.
ActionSpace action_space(const ConverterSpec& spec, std::size_t dc_channels = 1);

/// Voltage range of one output channel.
struct VoltageRange {
    double low;
    double high;
};
VoltageRange voltage_range(const ConverterSpec& spec);

struct ConversionResult {
    StateVec voltage;
    bool clamped{false};  // some duty was outside the admissible range
};

/// Dynamic average model. u = duty * u_sup for DC topologies and
/// u = duty * u_sup / 2 per B6 phase. For 2QC, 4QC and B6 the interlocking
/// time lowers the averaged voltage by u_sup * t_il / tau * sign(i). The
/// result is limited to the topology's voltage range.
ConversionResult convert_continuous(const ConverterSpec& spec, double tau, std::span<const double> duty,
                                    std::span<const double> current);

/// Switching command to voltage.
///   1QC: 0 -> 0, 1 -> u_sup
///   2QC: 0 -> 0 (low switch), 1 -> u_sup (high switch),
///        2 -> both open: u_sup if i < 0 else 0
///   4QC: bit0 = leg A high, bit1 = leg B high, u = u_sup (A - B)
///   B6:  bit k set -> phase k at +u_sup/2, else -u_sup/2
/// For multi-channel DC compositions the command is mixed-radix with
/// channel 0 most significant.
StateVec convert_discrete(const ConverterSpec& spec, int command, std::span<const double> current,
                          std::size_t dc_channels = 1);

/// Zero-voltage action of the topology (buffer fill on reset).
Action zero_action(const ConverterSpec& spec, std::size_t dc_channels = 1);

/// FIFO realising the one-step dead time. Depth 1 when enabled, else a
/// pass-through.
class ActionBuffer {
public:
    ActionBuffer() = default;
    ActionBuffer(bool dead_time, Action zero) : dead_time_(dead_time), zero_(std::move(zero)) { reset(); }

    void reset() { pending_ = zero_; }
    Action push(const Action& action);
    [[nodiscard]] std::size_t depth() const { return dead_time_ ? 1 : 0; }

private:
    bool dead_time_{false};
    Action zero_{0};
    Action pending_{0};
};

}  // namespace drivegym
