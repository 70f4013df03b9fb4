#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "drivegym/controllers.hpp"
#include "drivegym/env.hpp"

namespace drivegym {

struct TrajectoryRow {
    std::size_t step{0};
    double time{0.0};
    std::vector<double> raw;
    std::vector<double> norm;
    std::vector<double> ref;  // NaN for entries without a reference
    std::vector<double> action;
    double reward{0.0};
    bool done{false};

    bool operator==(const TrajectoryRow& other) const;
};

/// One closed-loop episode, one row per step (the reset state is not a row).
struct TrajectoryRecord {
    std::vector<std::string> entries;
    std::size_t action_channels{1};
    std::vector<TrajectoryRow> rows;

    // Metadata for MAE and plotting; not part of the CSV.
    std::vector<double> weights;
    std::vector<double> widths;
    std::vector<double> nominal;
    std::vector<bool> nonnegative;
    double safety_margin{1.0};
    std::uint64_t seed{0};
    std::optional<std::size_t> violated_entry;
};

TrajectoryRecord run_episode(Environment& env, Controller& controller, std::optional<std::uint64_t> seed);
TrajectoryRecord run_episode(const EnvConfig& cfg, Controller& controller, std::uint64_t seed);

/// (1/N) sum_t sum_k w_k |s_k,t - s*_k,t| / width_k over the recorded rows.
double mae_from_record(const TrajectoryRecord& record);

struct BenchmarkReport {
    std::string controller;
    std::uint64_t seed{0};
    std::string config_digest;
    std::vector<std::uint64_t> episode_seeds;
    std::vector<double> mae;
    std::vector<std::size_t> lengths;
    std::vector<bool> violated;
    /// Running count of violated episodes in episode order.
    std::vector<std::size_t> cumulative_violations;
    double mae_min{0.0};
    double mae_mean{0.0};
    double mae_max{0.0};
    std::size_t violations{0};
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

/// Seed of episode i in a benchmark seeded with `seed`.
std::uint64_t episode_seed(std::uint64_t seed, std::size_t index);

/// n independent episodes. threads = 0 picks the hardware concurrency. The
/// report does not depend on the thread count. Episode errors are rethrown
/// with the episode index prepended.
BenchmarkReport benchmark(const EnvConfig& cfg, const ControllerFactory& factory, std::size_t n_episodes,
                          std::uint64_t seed, unsigned threads = 0);

/// Recomputes min/mean/max, violation count and the cumulative counter from
/// the per-episode vectors.
void aggregate(BenchmarkReport& report);

/// 64-bit FNV-1a of the canonical configuration JSON, as 16 hex digits.
std::string config_digest(const EnvConfig& cfg);

std::string report_to_json(const BenchmarkReport& report);

/// Header: step,time_s,<entry>_raw,<entry>_norm,<entry>_ref,...,action_<ch>,reward,done
std::string csv_header(const TrajectoryRecord& record);
void write_csv(const TrajectoryRecord& record, const std::filesystem::path& path);
/// Rows and layout only; metadata is left at its defaults.
TrajectoryRecord read_csv(const std::filesystem::path& path);

/// episode,seed,mae,length,violated,cumulative_violations
void write_report_csv(const BenchmarkReport& report, const std::filesystem::path& path);
BenchmarkReport read_report_csv(const std::filesystem::path& path);

/// SVG with one panel per requested entry: state, reference, nominal
/// (dotted) and limit (dashed) lines in physical units.
std::string plot_svg(const TrajectoryRecord& record, const std::vector<std::string>& entries);
void write_plot(const TrajectoryRecord& record, const std::vector<std::string>& entries,
                const std::filesystem::path& path);

}  // namespace drivegym
