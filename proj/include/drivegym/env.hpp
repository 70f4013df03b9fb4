#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drivegym/config.hpp"
#include "drivegym/converter.hpp"
#include "drivegym/reference.hpp"
#include "drivegym/simulator.hpp"

namespace drivegym {

/// value / (xi * nominal).
double normalize(double value, double nominal, double safety_margin);

/// Weighted tracking reward. Each error is divided by the width of its
/// entry's normalized range (2 for bipolar, 1 for nonnegative entries) so that
/// weights summing to one keep WSAE/WSSE in [-1, 0] and SWSAE/SWSSE in [0, 1].
double reward(std::span<const double> norm_state, std::span<const double> norm_reference,
              std::span<const double> weights, std::span<const double> widths, RewardFunction kind);

/// First entry with |value| > limit (strict), if any. Exempt entries carry an
/// infinite limit.
std::optional<std::size_t> limit_check(std::span<const double> state, std::span<const double> limits);

/// Reward returned on a limit violation: 0, the configured constant, or
/// -1 / (1 - gamma). Throws ConfigError for gamma outside (0, 1).
double violation_penalty(const LimitPenalty& penalty);

/// Adds N(0, rho_k / (6 xi^2)) to each normalized entry.
void add_noise(std::span<double> values, std::span<const double> noise_levels, double safety_margin, Rng& rng);

struct StepInfo {
    std::optional<std::size_t> violated_entry;
    std::vector<double> raw_state;    // physical units, before measurement noise
    std::vector<double> norm_state;   // normalized, before measurement noise
    StateVec applied_voltage;         // after dead time, interlock and input noise
    bool action_clamped{false};
};

struct StepResult {
    std::vector<double> observation;
    double reward{0.0};
    bool done{false};
    StepInfo info;
};

/// One motor-control episode state machine: reset() then step() until done.
///
/// The observation is the normalized environment state followed by, for every
/// entry with a positive reward weight, the current and next
/// prediction_horizon - 1 reference values.
///
/// Each step runs: dead-time buffer, converter (interlock, input-voltage
/// noise), ODE step over tau, state assembly, limit check, reward or penalty,
/// observation with measurement noise.
class Environment {
public:
    explicit Environment(EnvConfig cfg);

    /// Samples an initial state and new references. Without a seed the next
    /// episode seed is drawn from the environment's own stream.
    std::vector<double> reset(std::optional<std::uint64_t> seed = std::nullopt);

    /// Throws UsageError when called before reset() or after the episode ended,
    /// InputError for actions outside the action space.
    StepResult step(const Action& action);

    [[nodiscard]] const EnvConfig& config() const { return cfg_; }
    [[nodiscard]] const ActionSpace& action_space() const { return sim_.action_space(); }
    [[nodiscard]] const DriveSimulator& simulator() const { return sim_; }
    [[nodiscard]] std::size_t observation_size() const;
    [[nodiscard]] const std::vector<std::size_t>& tracked() const { return tracked_; }
    [[nodiscard]] const std::vector<bool>& nonnegative() const { return nonneg_; }
    [[nodiscard]] const std::vector<double>& widths() const { return widths_; }
    [[nodiscard]] const std::vector<double>& limits() const { return limits_; }
    [[nodiscard]] const ReferenceTrajectory& references() const { return refs_; }
    [[nodiscard]] const StateVec& motor_state() const { return state_; }
    [[nodiscard]] std::size_t step_count() const { return steps_; }
    [[nodiscard]] bool done() const { return done_; }
    [[nodiscard]] std::uint64_t episode_seed() const { return episode_seed_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

    /// Reference values of all entries at step t (0 for untracked entries).
    [[nodiscard]] std::vector<double> reference_at(std::size_t t) const;

    /// Replaces the motor state mid-episode (fault injection in tests).
    void set_motor_state(const StateVec& state);

private:
    StateVec sample_initial_state(Rng& rng) const;
    std::vector<double> observe(const std::vector<double>& norm_state);

    EnvConfig cfg_;
    DriveSimulator sim_;
    std::vector<std::string> warnings_;
    std::vector<std::size_t> tracked_;
    std::vector<bool> nonneg_;
    std::vector<double> widths_;
    std::vector<double> limits_;
    std::vector<bool> is_voltage_;

    Rng seed_stream_;
    Rng noise_rng_;
    std::uint64_t episode_seed_{0};
    ActionBuffer buffer_;
    ReferenceTrajectory refs_;
    StateVec state_;
    std::size_t steps_{0};
    bool started_{false};
    bool done_{false};
};

}  // namespace drivegym
