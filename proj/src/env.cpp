#include "drivegym/env.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "drivegym/errors.hpp"

namespace drivegym {

double normalize(double value, double nominal, double safety_margin) { return value / (safety_margin * nominal); }

double reward(std::span<const double> norm_state, std::span<const double> norm_reference,
              std::span<const double> weights, std::span<const double> widths, RewardFunction kind)
{
    double sum = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] == 0.0) continue;
        const double e = std::abs(norm_state[k] - norm_reference[k]) / widths[k];
        const bool squared = kind == RewardFunction::Wsse || kind == RewardFunction::Swsse;
        sum += weights[k] * (squared ? e * e : e);
    }
    const bool shifted = kind == RewardFunction::Swsae || kind == RewardFunction::Swsse;
    return shifted ? 1.0 - sum : -sum;
}

std::optional<std::size_t> limit_check(std::span<const double> state, std::span<const double> limits)
{
    for (std::size_t k = 0; k < state.size(); ++k) {
        if (std::abs(state[k]) > limits[k] || std::isnan(state[k])) return k;
    }
    return std::nullopt;
}

double violation_penalty(const LimitPenalty& penalty)
{
    switch (penalty.mode) {
    case PenaltyMode::Zero: return 0.0;
    case PenaltyMode::Constant: return penalty.constant;
    case PenaltyMode::QBased:
        if (!(penalty.gamma > 0.0 && penalty.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
        return -1.0 / (1.0 - penalty.gamma);
    }
    return 0.0;
}

void add_noise(std::span<double> values, std::span<const double> noise_levels, double safety_margin, Rng& rng)
{
    std::normal_distribution<double> standard(0.0, 1.0);
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (noise_levels[k] <= 0.0) continue;
        const double sigma = std::sqrt(noise_levels[k] / 6.0) / safety_margin;
        values[k] += sigma * standard(rng);
    }
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)), sim_(cfg_), seed_stream_(cfg_.seed)
{
    warnings_ = cfg_.validate();
    tracked_ = tracked_entries(cfg_);
    nonneg_ = nonnegative_entries(cfg_.motor.kind, cfg_.converter.topology);
    const auto& entries = env_entries(cfg_.motor.kind);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        widths_.push_back(nonneg_[k] ? 1.0 : 2.0);
        const bool exempt = entries[k].role == EntryRole::Supply || entries[k].role == EntryRole::Angle;
        limits_.push_back(exempt ? std::numeric_limits<double>::infinity()
                                 : cfg_.safety_margin * cfg_.nominal_values[k]);
        is_voltage_.push_back(entries[k].role == EntryRole::Voltage);
    }
    buffer_ = ActionBuffer(cfg_.converter.dead_time, zero_action(cfg_.converter, cfg_.dc_channels()));
}

std::size_t Environment::observation_size() const
{
    return cfg_.entry_count() + tracked_.size() * cfg_.prediction_horizon;
}

StateVec Environment::sample_initial_state(Rng& rng) const
{
    const auto draw = [&](std::size_t entry, double nominal) {
        const double lo = nonneg_[entry] ? 0.0 : -nominal;
        return std::uniform_real_distribution<double>(lo, nominal)(rng);
    };
    const auto& nom = cfg_.nominal_values;
    switch (cfg_.motor.kind) {
    case MotorKind::ExternallyExcited:
    case MotorKind::Shunt: {
        const double i_a = draw(2, nom[2]);
        const double i_e = draw(3, nom[3]);
        const double omega = draw(0, nom[0]);
        return {i_a, i_e, omega};
    }
    case MotorKind::Series:
    case MotorKind::PermanentlyExcited: {
        const double i = draw(2, nom[2]);
        const double omega = draw(0, nom[0]);
        return {i, omega};
    }
    case MotorKind::Pmsm: {
        // Uniform in the disk |i_dq| <= i_N keeps every phase current within nominal.
        constexpr double two_pi = 2.0 * std::numbers::pi;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double radius = nom[2] * std::sqrt(unit(rng));
        const double angle = two_pi * unit(rng);
        const double omega_me_n = nom[0] / cfg_.motor.pmsm.pole_pairs;
        const double omega_me = std::uniform_real_distribution<double>(-omega_me_n, omega_me_n)(rng);
        const double eps_me = two_pi * unit(rng);
        return {radius * std::cos(angle), radius * std::sin(angle), omega_me, eps_me};
    }
    }
    return {};
}

std::vector<double> Environment::reset(std::optional<std::uint64_t> seed)
{
    episode_seed_ = seed ? *seed : seed_stream_();
    std::seed_seq episode_seq{static_cast<std::uint32_t>(episode_seed_), static_cast<std::uint32_t>(episode_seed_ >> 32),
                              1u};
    std::seed_seq noise_seq{static_cast<std::uint32_t>(episode_seed_), static_cast<std::uint32_t>(episode_seed_ >> 32),
                            2u};
    Rng episode_rng(episode_seq);
    noise_rng_.seed(noise_seq);

    state_ = sample_initial_state(episode_rng);
    refs_ = generate_references(sim_, state_, episode_rng);
    buffer_.reset();
    steps_ = 0;
    started_ = true;
    done_ = false;

    const auto u0 = sim_.voltages(zero_action(cfg_.converter, cfg_.dc_channels()), state_).u;
    const auto raw = sim_.env_vector(state_, u0.span());
    std::vector<double> norm(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) norm[k] = normalize(raw[k], cfg_.nominal_values[k], cfg_.safety_margin);
    return observe(norm);
}

std::vector<double> Environment::observe(const std::vector<double>& norm_state)
{
    std::vector<double> obs = norm_state;
    std::vector<double> levels = cfg_.noise_levels;
    // Voltage noise acts on the plant input, not on the measurement.
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (is_voltage_[k]) levels[k] = 0.0;
    }
    add_noise(obs, levels, cfg_.safety_margin, noise_rng_);
    const auto slice = reference_slice(refs_, tracked_, steps_, cfg_.prediction_horizon);
    obs.insert(obs.end(), slice.begin(), slice.end());
    return obs;
}

std::vector<double> Environment::reference_at(std::size_t t) const
{
    std::vector<double> out(cfg_.entry_count(), 0.0);
    for (std::size_t k : tracked_) out[k] = refs_.values[k].at(t);
    return out;
}

void Environment::set_motor_state(const StateVec& state)
{
    if (state.size() != cfg_.motor.state_size()) throw InputError("motor state has the wrong dimension");
    state_ = state;
}

StepResult Environment::step(const Action& action)
{
    if (!started_) throw UsageError("step() called before reset()");
    if (done_) throw UsageError("step() called after the episode ended; call reset()");

    const auto& space = sim_.action_space();
    if (space.mode == ActionMode::Discrete) {
        const auto* cmd = std::get_if<int>(&action);
        if (cmd == nullptr) throw InputError("discrete environment expects an integer switching command");
        if (*cmd < 0 || *cmd >= space.cardinality) {
            throw InputError("switching command " + std::to_string(*cmd) + " outside [0, " +
                             std::to_string(space.cardinality) + ")");
        }
    } else {
        const auto* duty = std::get_if<StateVec>(&action);
        if (duty == nullptr) throw InputError("continuous environment expects a duty-cycle vector");
        if (duty->size() != space.channels) {
            throw InputError("continuous action needs " + std::to_string(space.channels) + " channel(s)");
        }
        for (double d : *duty) {
            if (std::isnan(d)) throw InputError("duty cycle is NaN");
        }
    }

    StepResult result;
    const Action applied = buffer_.push(action);
    auto volt = sim_.voltages(applied, state_);
    result.info.action_clamped = volt.clamped;

    const std::size_t v0 = first_voltage_entry(cfg_.motor.kind);
    for (std::size_t ch = 0; ch < volt.u.size(); ++ch) {
        const std::size_t k = v0 + ch;
        const double rho = cfg_.noise_levels[k];
        if (rho > 0.0) {
            const double sigma = std::sqrt(rho / 6.0) / cfg_.safety_margin;
            volt.u[ch] += sigma * std::normal_distribution<double>(0.0, 1.0)(noise_rng_) * cfg_.safety_margin *
                          cfg_.nominal_values[k];
        }
    }
    result.info.applied_voltage = volt.u;

    state_ = sim_.advance(state_, volt.u.span());
    ++steps_;

    auto raw = sim_.env_vector(state_, volt.u.span());
    std::vector<double> norm(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) norm[k] = normalize(raw[k], cfg_.nominal_values[k], cfg_.safety_margin);

    result.info.violated_entry = limit_check(raw, limits_);
    if (result.info.violated_entry) {
        result.reward = violation_penalty(cfg_.penalty);
        done_ = true;
    } else {
        const auto ref = reference_at(steps_);
        result.reward = reward(norm, ref, cfg_.reward_weights, widths_, cfg_.reward_function);
        done_ = steps_ >= cfg_.episode_length;
    }
    result.done = done_;
    result.observation = observe(norm);
    result.info.raw_state = std::move(raw);
    result.info.norm_state = std::move(norm);
    return result;
}

}  // namespace drivegym
