#include "drivegym/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "drivegym/errors.hpp"

namespace drivegym {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(Rng& rng, double lo, double hi)
{
    if (!(hi > lo)) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct EntryBounds {
    double lower;
    double upper;
};

std::vector<EntryBounds> reference_bounds(const EnvConfig& cfg)
{
    const auto nonneg = nonnegative_entries(cfg.motor.kind, cfg.converter.topology);
    const double bound = 1.0 / cfg.safety_margin;
    std::vector<EntryBounds> out;
    for (bool nn : nonneg) out.push_back({nn ? 0.0 : -bound, bound});
    return out;
}

}  // namespace

std::size_t ReferenceTrajectory::length() const
{
    for (const auto& v : values) {
        if (!v.empty()) return v.size();
    }
    return 0;
}

ShapeKind sample_shape(const ReferenceConfig& cfg, Rng& rng)
{
    std::discrete_distribution<int> dist(cfg.shape_probabilities.begin(), cfg.shape_probabilities.end());
    return static_cast<ShapeKind>(dist(rng));
}

StandardShapeParams draw_standard_params(ShapeKind shape, std::size_t length, double lower, double upper,
                                         const ReferenceConfig& cfg, Rng& rng)
{
    const double half = 0.5 * (upper - lower);
    const double center = 0.5 * (upper + lower);
    StandardShapeParams p;
    const double len = static_cast<double>(length);
    p.period_steps =
        std::max(2.0, uniform(rng, cfg.period_min_fraction * len, cfg.period_max_fraction * len));
    p.amplitude = uniform(rng, 0.0, half);
    p.offset = uniform(rng, center - (half - p.amplitude), center + (half - p.amplitude));
    if (shape == ShapeKind::Triangular || shape == ShapeKind::Rectangular) p.ratio = uniform(rng, 0.1, 0.9);
    return p;
}

std::vector<double> render_standard(ShapeKind shape, const StandardShapeParams& p, std::size_t length, double lower,
                                    double upper)
{
    std::vector<double> out(length);
    for (std::size_t t = 0; t < length; ++t) {
        const double phase = std::fmod(static_cast<double>(t) / p.period_steps, 1.0);
        double unit = 0.0;
        switch (shape) {
        case ShapeKind::Sinusoidal: unit = std::sin(kTwoPi * phase); break;
        case ShapeKind::Triangular:
            unit = phase < p.ratio ? -1.0 + 2.0 * phase / p.ratio : 1.0 - 2.0 * (phase - p.ratio) / (1.0 - p.ratio);
            break;
        case ShapeKind::Rectangular: unit = phase < p.ratio ? 1.0 : -1.0; break;
        case ShapeKind::Sawtooth: unit = -1.0 + 2.0 * phase; break;
        case ShapeKind::RandomFourier: throw UsageError("random-fourier is not a standard shape");
        }
        out[t] = std::clamp(p.offset + p.amplitude * unit, lower, upper);
    }
    return out;
}

std::vector<double> generate_standard(ShapeKind shape, std::size_t length, double lower, double upper,
                                      const ReferenceConfig& cfg, Rng& rng)
{
    if (length < 1) throw UsageError("reference length must be >= 1");
    return render_standard(shape, draw_standard_params(shape, length, lower, upper, cfg, rng), length, lower, upper);
}

std::vector<double> band_limited_signal(std::size_t n, std::size_t cutoff_bin, Rng& rng)
{
    std::vector<double> x(n, 0.0);
    if (n == 0 || cutoff_bin == 0) return x;

    // cos/sin of 2 pi m / n; bin k at sample i uses m = k i mod n.
    std::vector<double> c(n);
    std::vector<double> s(n);
    for (std::size_t m = 0; m < n; ++m) {
        c[m] = std::cos(kTwoPi * static_cast<double>(m) / static_cast<double>(n));
        s[m] = std::sin(kTwoPi * static_cast<double>(m) / static_cast<double>(n));
    }
    std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
    for (std::size_t k = 1; k <= cutoff_bin; ++k) {
        const double mag = 1.0 / static_cast<double>(k);
        const double phase = phase_dist(rng);
        const double re = mag * std::cos(phase);
        const double im = mag * std::sin(phase);
        std::size_t m = 0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += re * c[m] - im * s[m];
            m += k;
            if (m >= n) m -= n;
        }
    }
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        for (double& v : x) v /= peak;
    }
    return x;
}

std::size_t fourier_cutoff_bin(const EnvConfig& cfg, std::size_t n)
{
    const double f_c = cfg.reference.fourier_cutoff_hz > 0.0 ? cfg.reference.fourier_cutoff_hz : 1.0 / (20.0 * cfg.tau());
    const auto bin = static_cast<std::size_t>(std::floor(f_c * static_cast<double>(n) * cfg.tau()));
    const std::size_t nyquist = n > 1 ? (n - 1) / 2 : 0;
    return std::min(bin, nyquist);
}

ReferenceTrajectory generate_random_fourier(const DriveSimulator& sim, const StateVec& x0, std::size_t length,
                                            Rng& rng)
{
    if (length < 1) throw UsageError("reference length must be >= 1");
    EnvConfig cont_cfg = sim.config();
    cont_cfg.converter.mode = ActionMode::Continuous;
    const DriveSimulator cont(cont_cfg);
    const auto& space = cont.action_space();
    const auto bounds = reference_bounds(cont_cfg);
    const auto tracked = tracked_entries(cont_cfg);
    const std::size_t cutoff = fourier_cutoff_bin(cont_cfg, length);

    for (int attempt = 0; attempt <= cont_cfg.reference.max_retries; ++attempt) {
        ReferenceTrajectory traj;
        traj.shape = ShapeKind::RandomFourier;
        traj.initial_state = x0;
        traj.duties.assign(length, StateVec(space.channels));
        for (std::size_t ch = 0; ch < space.channels; ++ch) {
            const auto signal = band_limited_signal(length, cutoff, rng);
            const double amp = uniform(rng, 0.0, 0.5 * (space.high - space.low));
            const double center = uniform(rng, space.low + amp, space.high - amp);
            for (std::size_t t = 0; t < length; ++t) traj.duties[t][ch] = center + amp * signal[t];
        }

        std::vector<std::vector<double>> raw;
        raw.reserve(length);
        try {
            ActionBuffer buffer(cont_cfg.converter.dead_time, zero_action(cont_cfg.converter, cont_cfg.dc_channels()));
            StateVec x = x0;
            auto u = cont.voltages(zero_action(cont_cfg.converter, cont_cfg.dc_channels()), x).u;
            raw.push_back(cont.env_vector(x, u.span()));
            for (std::size_t t = 1; t < length; ++t) {
                const Action applied = buffer.push(Action{traj.duties[t - 1]});
                u = cont.voltages(applied, x).u;
                x = cont.advance(x, u.span());
                raw.push_back(cont.env_vector(x, u.span()));
            }
        } catch (const NumericalError&) {
            continue;
        }

        traj.values.assign(cont_cfg.entry_count(), {});
        for (std::size_t k : tracked) {
            const double scale = cont_cfg.safety_margin * cont_cfg.nominal_values[k];
            auto& seq = traj.values[k];
            seq.resize(length);
            for (std::size_t t = 0; t < length; ++t) {
                seq[t] = std::clamp(raw[t][k] / scale, bounds[k].lower, bounds[k].upper);
            }
        }
        return traj;
    }
    throw NumericalError("random-fourier reference simulation diverged after " +
                         std::to_string(cont_cfg.reference.max_retries + 1) + " attempt(s)");
}

ReferenceTrajectory generate_references(const DriveSimulator& sim, const StateVec& x0, Rng& rng)
{
    const auto& cfg = sim.config();
    const std::size_t length = cfg.episode_length + cfg.prediction_horizon;
    const auto tracked = tracked_entries(cfg);
    const ShapeKind shape = sample_shape(cfg.reference, rng);

    ReferenceTrajectory traj;
    if (shape == ShapeKind::RandomFourier) {
        traj = generate_random_fourier(sim, x0, length, rng);
    } else {
        const auto bounds = reference_bounds(cfg);
        traj.shape = shape;
        traj.initial_state = x0;
        traj.values.assign(cfg.entry_count(), {});
        for (std::size_t k : tracked) {
            traj.values[k] = generate_standard(shape, length, bounds[k].lower, bounds[k].upper, cfg.reference, rng);
        }
    }
    // The horizon overhang past the last episode step repeats that step's value.
    const std::size_t last = cfg.episode_length;
    for (std::size_t k : tracked) {
        auto& seq = traj.values[k];
        if (cfg.zero_reference[k]) {
            seq.assign(length, 0.0);
            continue;
        }
        std::fill(seq.begin() + static_cast<std::ptrdiff_t>(last) + 1, seq.end(), seq[last]);
    }
    return traj;
}

std::vector<double> reference_slice(const ReferenceTrajectory& traj, std::span<const std::size_t> tracked,
                                    std::size_t t, std::size_t horizon)
{
    std::vector<double> out;
    out.reserve(tracked.size() * horizon);
    for (std::size_t k : tracked) {
        const auto& seq = traj.values.at(k);
        if (t + horizon > seq.size()) {
            throw UsageError("reference slice [" + std::to_string(t) + ", " + std::to_string(t + horizon) +
                             ") exceeds trajectory length " + std::to_string(seq.size()));
        }
        out.insert(out.end(), seq.begin() + static_cast<std::ptrdiff_t>(t),
                   seq.begin() + static_cast<std::ptrdiff_t>(t + horizon));
    }
    return out;
}

std::vector<std::size_t> tracked_entries(const EnvConfig& cfg)
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < cfg.reward_weights.size(); ++k) {
        if (cfg.reward_weights[k] > 0.0) out.push_back(k);
    }
    return out;
}

}  // namespace drivegym
