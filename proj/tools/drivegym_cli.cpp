// drivegym command-line front end: run, bench, export, plot.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drivegym/bench.hpp"
#include "drivegym/config.hpp"
#include "drivegym/controllers.hpp"
#include "drivegym/errors.hpp"

using namespace drivegym;

namespace {

struct Common {
    std::string config_path;
    std::string env_id;
    std::string controller{"pi"};
    std::uint64_t seed{0};
    bool seed_given{false};
    std::string out;
    ControllerOptions options;
};

void add_common(CLI::App* cmd, Common& c)
{
    auto* cfg = cmd->add_option("--config", c.config_path, "JSON configuration file");
    cmd->add_option("--env", c.env_id, "environment id, e.g. series-cont-v0")->excludes(cfg);
    cmd->add_option("--controller", c.controller, "controller")
        ->check(CLI::IsMember({"pi", "hysteresis", "external", "oracle", "zero"}));
    cmd->add_option("--seed", c.seed, "seed (default: the configuration's)");
    cmd->add_option("--out", c.out, "output path");
    cmd->add_option("--band", c.options.band, "hysteresis half band (normalized)");
    cmd->add_option("--speed-kp", c.options.speed_kp, "speed loop proportional gain, A per rad/s");
    cmd->add_option("--speed-ki", c.options.speed_ki, "speed loop integral gain, A per rad");
    cmd->add_option("--current-kp", c.options.current_kp, "current loop proportional gain, V per A");
    cmd->add_option("--current-ki", c.options.current_ki, "current loop integral gain, V per A s");
}

EnvConfig load(const Common& c, CLI::App* cmd)
{
    EnvConfig cfg = !c.config_path.empty() ? load_config(c.config_path)
                    : !c.env_id.empty()    ? config_from_id(c.env_id)
                                           : config_from_id("series-cont-v0");
    if (cmd->count("--seed") > 0) cfg.seed = c.seed;
    for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << '\n';
    return cfg;
}

std::unique_ptr<Controller> controller_for(const Common& c)
{
    if (c.controller == "external") return std::make_unique<ExternalController>(std::cin, std::cout);
    return make_controller(c.controller, c.options);
}

TrajectoryRecord one_episode(const EnvConfig& cfg, const Common& c)
{
    auto ctrl = controller_for(c);
    return run_episode(cfg, *ctrl, cfg.seed);
}

// Keeps stdout free for the external controller protocol.
std::ostream& report_stream(const Common& c) { return c.controller == "external" ? std::cerr : std::cout; }

void print_summary(std::ostream& os, const TrajectoryRecord& rec)
{
    os << "steps " << rec.rows.size() << "  mae " << mae_from_record(rec) << "  seed " << rec.seed;
    if (rec.violated_entry) os << "  limit violation on " << rec.entries[*rec.violated_entry];
    os << '\n';
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Electric drive control environments: simulate, benchmark, export and plot episodes"};
    app.require_subcommand(1);

    Common run_opts, bench_opts, export_opts, plot_opts;
    std::size_t episodes = 100;
    unsigned threads = 0;
    std::string per_episode_csv;
    std::string plot_entries{"omega"};

    auto* run = app.add_subcommand("run", "run one episode and print its MAE");
    add_common(run, run_opts);

    auto* bench = app.add_subcommand("bench", "MAE statistics over seeded episodes");
    add_common(bench, bench_opts);
    bench->add_option("--episodes", episodes, "episode count")->check(CLI::PositiveNumber);
    bench->add_option("--threads", threads, "worker threads, 0 = all cores");
    bench->add_option("--episodes-csv", per_episode_csv, "also write per-episode results as CSV");

    auto* exp = app.add_subcommand("export", "write one episode as CSV");
    add_common(exp, export_opts);
    exp->get_option("--out")->required();

    auto* plot = app.add_subcommand("plot", "write one episode as an SVG plot");
    add_common(plot, plot_opts);
    plot->get_option("--out")->required();
    plot->add_option("--entries", plot_entries, "comma-separated entries, e.g. omega,i,u");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            const auto cfg = load(run_opts, run);
            const auto rec = one_episode(cfg, run_opts);
            print_summary(report_stream(run_opts), rec);
            if (!run_opts.out.empty()) write_csv(rec, run_opts.out);
        } else if (*bench) {
            if (bench_opts.controller == "external") throw ConfigError("bench does not support the external controller");
            const auto cfg = load(bench_opts, bench);
            const ControllerFactory factory = [&] { return make_controller(bench_opts.controller, bench_opts.options); };
            const auto report = benchmark(cfg, factory, episodes, cfg.seed, threads);
            std::printf("controller %s  episodes %zu  seed %llu  config %s\n", report.controller.c_str(),
                        report.mae.size(), static_cast<unsigned long long>(report.seed), report.config_digest.c_str());
            std::printf("MAE per step   min %.6g   mean %.6g   max %.6g\n", report.mae_min, report.mae_mean,
                        report.mae_max);
            std::printf("limit violations %zu\n", report.violations);
            if (!bench_opts.out.empty()) {
                std::ofstream out(bench_opts.out);
                if (!out) throw InputError("cannot open '" + bench_opts.out + "' for writing");
                out << report_to_json(report) << '\n';
            }
            if (!per_episode_csv.empty()) write_report_csv(report, per_episode_csv);
        } else if (*exp) {
            const auto cfg = load(export_opts, exp);
            const auto rec = one_episode(cfg, export_opts);
            write_csv(rec, export_opts.out);
            print_summary(report_stream(export_opts), rec);
        } else if (*plot) {
            const auto cfg = load(plot_opts, plot);
            const auto rec = one_episode(cfg, plot_opts);
            write_plot(rec, split_list(plot_entries), plot_opts.out);
            print_summary(report_stream(plot_opts), rec);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
