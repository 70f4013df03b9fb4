#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "drivegym/converter.hpp"
#include "drivegym/integrator.hpp"
#include "drivegym/motor.hpp"

namespace drivegym {

enum class RewardFunction { Wsae, Wsse, Swsae, Swsse };
enum class PenaltyMode { Zero, Constant, QBased };

std::string_view reward_name(RewardFunction f);  // "wsae", "wsse", "swsae", "swsse"
RewardFunction reward_from_name(std::string_view name);

struct LimitPenalty {
    PenaltyMode mode{PenaltyMode::Zero};
    double constant{-1.0};  // PenaltyMode::Constant, must be < 0
    double gamma{0.99};     // PenaltyMode::QBased, in (0, 1)
};

/// Order of the shape probabilities.
enum class ShapeKind { Sinusoidal, Triangular, Rectangular, Sawtooth, RandomFourier };
inline constexpr std::size_t kShapeCount = 5;
std::string_view shape_name(ShapeKind s);

struct ReferenceConfig {
    std::array<double, kShapeCount> shape_probabilities{0.125, 0.125, 0.125, 0.125, 0.5};
    /// Standard-shape period range as fractions of the episode length.
    double period_min_fraction{0.01};
    double period_max_fraction{1.0};
    /// Band limit of the random voltage spectrum; <= 0 selects 1 / (20 tau).
    double fourier_cutoff_hz{0.0};
    int max_retries{5};
};

struct EnvConfig {
    MotorModel motor{};
    ConverterSpec converter{};
    LoadParams load{};
    IntegratorChoice integrator{};
    std::size_t episode_length{10000};
    std::size_t prediction_horizon{1};
    RewardFunction reward_function{RewardFunction::Swsae};
    double safety_margin{1.3};
    LimitPenalty penalty{};
    /// Per environment-state entry (see env_entries()).
    std::vector<double> reward_weights;
    std::vector<double> nominal_values;
    std::vector<double> noise_levels;
    std::vector<bool> zero_reference;
    ReferenceConfig reference{};
    std::uint64_t seed{0};

    [[nodiscard]] double tau() const { return integrator.tau; }
    [[nodiscard]] std::size_t entry_count() const { return env_entries(motor.kind).size(); }
    [[nodiscard]] std::size_t dc_channels() const { return motor.kind == MotorKind::ExternallyExcited ? 2 : 1; }
    /// Index of an entry by name; throws ConfigError if unknown.
    [[nodiscard]] std::size_t entry_index(std::string_view name) const;

    /// Throws ConfigError on any violated invariant. Returns non-fatal
    /// warnings (e.g. reward weights not summing to one).
    std::vector<std::string> validate() const;
};

/// Defaults for a motor / action-mode pair: default motor parameters, load
/// and nominal values, converter 1QC for the series motor, 4QC for other DC
/// motors and B6 for the PMSM, SWSAE with weight 1 on omega.
EnvConfig default_config(MotorKind kind, ActionMode mode);

/// Parses "<motor>-<cont|disc>-v0".
EnvConfig config_from_id(std::string_view id);
std::string env_id(const EnvConfig& cfg);

/// Default nominal value of every environment-state entry.
std::vector<double> default_nominal_values(const MotorModel& motor, const ConverterSpec& converter);

/// Builds a configuration from a JSON document. Keys:
///   env_id | motor + action_mode, converter, u_sup, dead_time,
///   interlocking_time, motor_params{..}, load_params{a,b,c,j_load}, tau,
///   integrator, rtol, atol, episode_length, prediction_horizon,
///   reward_function, reward_weights{entry: w}, safety_margin,
///   nominal_values{entry: x}, noise_levels{entry: rho}, limit_penalty,
///   penalty_constant, gamma, zero_reference[entries], seed,
///   reference{shape_probabilities[5], period_min_fraction,
///   period_max_fraction, fourier_cutoff_hz, max_retries}.
/// Unknown keys raise ConfigError naming the key.
EnvConfig config_from_json(std::string_view json_text);
EnvConfig load_config(const std::filesystem::path& path);
/// Canonical JSON rendering, the inverse of config_from_json.
std::string config_to_json(const EnvConfig& cfg);

}  // namespace drivegym
