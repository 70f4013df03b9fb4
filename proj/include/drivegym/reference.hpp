#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "drivegym/config.hpp"
#include "drivegym/simulator.hpp"

namespace drivegym {

using Rng = std::mt19937_64;

/// Reference values in normalized units, one sequence per environment-state
/// entry. Untracked entries hold an empty sequence.
struct ReferenceTrajectory {
    ShapeKind shape{ShapeKind::Sinusoidal};
    std::vector<std::vector<double>> values;
    /// Random-fourier only: the duty cycle applied before each step and the
    /// initial motor state, enough to re-simulate the trajectory.
    std::vector<StateVec> duties;
    StateVec initial_state;

    [[nodiscard]] std::size_t length() const;
};

ShapeKind sample_shape(const ReferenceConfig& cfg, Rng& rng);

struct StandardShapeParams {
    double period_steps{100.0};
    double amplitude{0.0};  // half peak-to-peak
    double offset{0.0};
    double ratio{0.5};      // triangle rise fraction / rectangle duty
};

/// Draws period, amplitude, offset and ratio so that the waveform stays
/// within [lower, upper].
StandardShapeParams draw_standard_params(ShapeKind shape, std::size_t length, double lower, double upper,
                                         const ReferenceConfig& cfg, Rng& rng);

/// Evaluates the waveform for steps 0..length-1 and clips to [lower, upper].
std::vector<double> render_standard(ShapeKind shape, const StandardShapeParams& p, std::size_t length, double lower,
                                    double upper);

std::vector<double> generate_standard(ShapeKind shape, std::size_t length, double lower, double upper,
                                      const ReferenceConfig& cfg, Rng& rng);

/// Real band-limited signal of n samples: bins 1..cutoff_bin with magnitude
/// 1/k and uniform random phase, inverse transformed and scaled to a peak
/// magnitude of one. All-zero when cutoff_bin is 0.
std::vector<double> band_limited_signal(std::size_t n, std::size_t cutoff_bin, Rng& rng);

/// Highest nonzero spectrum bin for a trajectory of n samples.
std::size_t fourier_cutoff_bin(const EnvConfig& cfg, std::size_t n);

/// Random voltage spectrum -> duty sequence -> open-loop simulation from x0.
/// Every tracked entry receives the simulated (normalized, clipped) value.
/// Non-finite simulations are redrawn up to cfg.reference.max_retries times.
ReferenceTrajectory generate_random_fourier(const DriveSimulator& sim, const StateVec& x0, std::size_t length,
                                            Rng& rng);

/// Full per-episode generation: shape draw, then standard shapes (independent
/// parameters per tracked entry) or a random-fourier simulation. Zero-
/// reference entries are identically 0.
ReferenceTrajectory generate_references(const DriveSimulator& sim, const StateVec& x0, Rng& rng);

/// Values at t .. t+horizon-1 for each tracked entry, entry-major.
std::vector<double> reference_slice(const ReferenceTrajectory& traj, std::span<const std::size_t> tracked,
                                    std::size_t t, std::size_t horizon);

/// Entries with a positive reward weight.
std::vector<std::size_t> tracked_entries(const EnvConfig& cfg);

}  // namespace drivegym
