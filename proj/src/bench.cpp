#include "drivegym/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "drivegym/errors.hpp"

namespace drivegym {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_bits(double a, double b)
{
    return (std::isnan(a) && std::isnan(b)) || a == b;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!same_bits(a[k], b[k])) return false;
    }
    return true;
}

void append_number(std::string& out, double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void append_number(std::string& out, std::uint64_t v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

double parse_double(std::string_view s, const std::filesystem::path& path, std::size_t line)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InputError(path.string() + ":" + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

std::uint64_t parse_uint(std::string_view s, const std::filesystem::path& path, std::size_t line)
{
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InputError(path.string() + ":" + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
    return in;
}

[[noreturn]] void rethrow_with_episode(std::exception_ptr error, std::size_t index)
{
    const std::string prefix = "episode " + std::to_string(index) + ": ";
    try {
        std::rethrow_exception(error);
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(prefix + e.what());
    } catch (const InputError& e) {
        throw InputError(prefix + e.what());
    } catch (const UsageError& e) {
        throw UsageError(prefix + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(prefix + e.what());
    }
}

}  // namespace

bool TrajectoryRow::operator==(const TrajectoryRow& o) const
{
    return step == o.step && same_bits(time, o.time) && same_bits(raw, o.raw) && same_bits(norm, o.norm) &&
           same_bits(ref, o.ref) && same_bits(action, o.action) && same_bits(reward, o.reward) && done == o.done;
}

TrajectoryRecord run_episode(Environment& env, Controller& controller, std::optional<std::uint64_t> seed)
{
    const auto& cfg = env.config();
    TrajectoryRecord rec;
    for (const auto& e : env_entries(cfg.motor.kind)) rec.entries.push_back(e.name);
    rec.action_channels = env.action_space().mode == ActionMode::Discrete ? 1 : env.action_space().channels;
    rec.weights = cfg.reward_weights;
    rec.widths = env.widths();
    rec.nominal = cfg.nominal_values;
    rec.nonnegative = env.nonnegative();
    rec.safety_margin = cfg.safety_margin;

    auto obs = env.reset(seed);
    rec.seed = env.episode_seed();
    controller.reset(env);
    rec.rows.reserve(cfg.episode_length);

    std::vector<bool> tracked(cfg.entry_count(), false);
    for (std::size_t k : env.tracked()) tracked[k] = true;

    while (!env.done()) {
        const Action action = controller.act(obs);
        auto result = env.step(action);
        TrajectoryRow row;
        row.step = env.step_count();
        row.time = static_cast<double>(row.step) * cfg.tau();
        row.ref = env.reference_at(row.step);
        for (std::size_t k = 0; k < row.ref.size(); ++k) {
            if (!tracked[k]) row.ref[k] = kNaN;
        }
        if (const auto* cmd = std::get_if<int>(&action)) {
            row.action = {static_cast<double>(*cmd)};
        } else {
            const auto& duty = std::get<StateVec>(action);
            row.action.assign(duty.begin(), duty.end());
        }
        row.reward = result.reward;
        row.done = result.done;
        row.raw = std::move(result.info.raw_state);
        row.norm = std::move(result.info.norm_state);
        rec.violated_entry = result.info.violated_entry;
        rec.rows.push_back(std::move(row));
        obs = std::move(result.observation);
    }
    return rec;
}

TrajectoryRecord run_episode(const EnvConfig& cfg, Controller& controller, std::uint64_t seed)
{
    Environment env(cfg);
    return run_episode(env, controller, seed);
}

double mae_from_record(const TrajectoryRecord& record)
{
    if (record.rows.empty()) return 0.0;
    double total = 0.0;
    for (const auto& row : record.rows) {
        for (std::size_t k = 0; k < record.weights.size(); ++k) {
            if (record.weights[k] <= 0.0) continue;
            total += record.weights[k] * std::abs(row.norm[k] - row.ref[k]) / record.widths[k];
        }
    }
    return total / static_cast<double>(record.rows.size());
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(std::uint64_t{index} >> 32)};
    Rng rng(seq);
    return rng();
}

void aggregate(BenchmarkReport& r)
{
    const std::size_t n = r.mae.size();
    r.cumulative_violations.assign(n, 0);
    r.violations = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (r.violated[i]) ++r.violations;
        r.cumulative_violations[i] = r.violations;
    }
    if (n == 0) {
        r.mae_min = r.mae_mean = r.mae_max = 0.0;
        return;
    }
    r.mae_min = *std::min_element(r.mae.begin(), r.mae.end());
    r.mae_max = *std::max_element(r.mae.begin(), r.mae.end());
    double sum = 0.0;
    for (double m : r.mae) sum += m;  // index order, independent of scheduling
    r.mae_mean = sum / static_cast<double>(n);
}

BenchmarkReport benchmark(const EnvConfig& cfg, const ControllerFactory& factory, std::size_t n_episodes,
                          std::uint64_t seed, unsigned threads)
{
    if (n_episodes < 1) throw UsageError("benchmark needs at least one episode");
    cfg.validate();

    BenchmarkReport report;
    report.seed = seed;
    report.config_digest = config_digest(cfg);
    report.controller = std::string(factory()->name());
    report.episode_seeds.resize(n_episodes);
    report.mae.assign(n_episodes, 0.0);
    report.lengths.assign(n_episodes, 0);
    report.violated.assign(n_episodes, false);
    for (std::size_t i = 0; i < n_episodes; ++i) report.episode_seeds[i] = episode_seed(seed, i);

    std::vector<std::exception_ptr> errors(n_episodes);
    std::vector<char> violated(n_episodes, 0);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n_episodes; i = next++) {
            try {
                auto controller = factory();
                const auto rec = run_episode(cfg, *controller, report.episode_seeds[i]);
                report.mae[i] = mae_from_record(rec);
                report.lengths[i] = rec.rows.size();
                violated[i] = rec.violated_entry.has_value() ? 1 : 0;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_episodes));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < n_episodes; ++i) {
        if (errors[i]) rethrow_with_episode(errors[i], i);
        report.violated[i] = violated[i] != 0;
    }
    aggregate(report);
    return report;
}

std::string config_digest(const EnvConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config_to_json(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string report_to_json(const BenchmarkReport& r)
{
    nlohmann::ordered_json j;
    j["controller"] = r.controller;
    j["seed"] = r.seed;
    j["config_digest"] = r.config_digest;
    j["episodes"] = r.mae.size();
    j["mae_min"] = r.mae_min;
    j["mae_mean"] = r.mae_mean;
    j["mae_max"] = r.mae_max;
    j["violations"] = r.violations;
    j["episode_seeds"] = r.episode_seeds;
    j["mae"] = r.mae;
    j["lengths"] = r.lengths;
    j["violated"] = r.violated;
    j["cumulative_violations"] = r.cumulative_violations;
    return j.dump(2);
}

std::string csv_header(const TrajectoryRecord& record)
{
    std::string h = "step,time_s";
    for (const auto& e : record.entries) h += "," + e + "_raw," + e + "_norm," + e + "_ref";
    for (std::size_t ch = 0; ch < record.action_channels; ++ch) h += ",action_" + std::to_string(ch);
    h += ",reward,done";
    return h;
}

void write_csv(const TrajectoryRecord& record, const std::filesystem::path& path)
{
    auto out = open_out(path);
    std::string buf = csv_header(record);
    buf += '\n';
    for (const auto& row : record.rows) {
        append_number(buf, std::uint64_t{row.step});
        buf += ',';
        append_number(buf, row.time);
        for (std::size_t k = 0; k < record.entries.size(); ++k) {
            for (double v : {row.raw[k], row.norm[k], row.ref[k]}) {
                buf += ',';
                append_number(buf, v);
            }
        }
        for (double a : row.action) {
            buf += ',';
            append_number(buf, a);
        }
        buf += ',';
        append_number(buf, row.reward);
        buf += row.done ? ",1\n" : ",0\n";
    }
    out << buf;
    if (!out) throw InputError("write to '" + path.string() + "' failed");
}

TrajectoryRecord read_csv(const std::filesystem::path& path)
{
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
    const auto head = split(line);
    TrajectoryRecord rec;
    std::size_t col = 2;
    if (head.size() < 4 || head[0] != "step" || head[1] != "time_s") throw InputError(path.string() + ": bad header");
    while (col + 2 < head.size() && head[col].ends_with("_raw")) {
        const auto name = head[col].substr(0, head[col].size() - 4);
        if (head[col + 1] != std::string(name) + "_norm" || head[col + 2] != std::string(name) + "_ref") {
            throw InputError(path.string() + ": bad header near '" + std::string(head[col]) + "'");
        }
        rec.entries.emplace_back(name);
        col += 3;
    }
    rec.action_channels = 0;
    while (col < head.size() && head[col].starts_with("action_")) {
        ++rec.action_channels;
        ++col;
    }
    if (col + 2 != head.size() || head[col] != "reward" || head[col + 1] != "done") {
        throw InputError(path.string() + ": bad header tail");
    }

    const std::size_t n = rec.entries.size();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != head.size()) throw InputError(path.string() + ":" + std::to_string(line_no) + ": wrong field count");
        TrajectoryRow row;
        row.step = parse_uint(f[0], path, line_no);
        row.time = parse_double(f[1], path, line_no);
        row.raw.resize(n);
        row.norm.resize(n);
        row.ref.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            row.raw[k] = parse_double(f[2 + 3 * k], path, line_no);
            row.norm[k] = parse_double(f[3 + 3 * k], path, line_no);
            row.ref[k] = parse_double(f[4 + 3 * k], path, line_no);
        }
        for (std::size_t ch = 0; ch < rec.action_channels; ++ch) {
            row.action.push_back(parse_double(f[2 + 3 * n + ch], path, line_no));
        }
        row.reward = parse_double(f[f.size() - 2], path, line_no);
        row.done = parse_uint(f.back(), path, line_no) != 0;
        rec.rows.push_back(std::move(row));
    }
    return rec;
}

void write_report_csv(const BenchmarkReport& r, const std::filesystem::path& path)
{
    auto out = open_out(path);
    std::string buf = "episode,seed,mae,length,violated,cumulative_violations\n";
    for (std::size_t i = 0; i < r.mae.size(); ++i) {
        append_number(buf, std::uint64_t{i});
        buf += ',';
        append_number(buf, r.episode_seeds[i]);
        buf += ',';
        append_number(buf, r.mae[i]);
        buf += ',';
        append_number(buf, std::uint64_t{r.lengths[i]});
        buf += r.violated[i] ? ",1," : ",0,";
        append_number(buf, std::uint64_t{r.cumulative_violations[i]});
        buf += '\n';
    }
    out << buf;
    if (!out) throw InputError("write to '" + path.string() + "' failed");
}

BenchmarkReport read_report_csv(const std::filesystem::path& path)
{
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "episode,seed,mae,length,violated,cumulative_violations") {
        throw InputError(path.string() + ": bad report header");
    }
    BenchmarkReport r;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 6) throw InputError(path.string() + ":" + std::to_string(line_no) + ": wrong field count");
        r.episode_seeds.push_back(parse_uint(f[1], path, line_no));
        r.mae.push_back(parse_double(f[2], path, line_no));
        r.lengths.push_back(parse_uint(f[3], path, line_no));
        r.violated.push_back(parse_uint(f[4], path, line_no) != 0);
    }
    aggregate(r);
    return r;
}

std::string plot_svg(const TrajectoryRecord& record, const std::vector<std::string>& entries)
{
    constexpr double width = 900.0;
    constexpr double panel = 180.0;
    constexpr double left = 70.0;
    constexpr double right = 20.0;
    constexpr double gap = 30.0;
    const double height = gap + static_cast<double>(entries.size()) * (panel + gap);
    const bool has_meta = !record.nominal.empty();

    std::ostringstream svg;
    svg.precision(6);
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    const std::size_t n = record.rows.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 1500);
    const double t0 = n ? record.rows.front().time : 0.0;
    const double t1 = n ? record.rows.back().time : 1.0;
    const double t_span = t1 > t0 ? t1 - t0 : 1.0;

    for (std::size_t p = 0; p < entries.size(); ++p) {
        const auto it = std::find(record.entries.begin(), record.entries.end(), entries[p]);
        if (it == record.entries.end()) throw InputError("cannot plot unknown entry '" + entries[p] + "'");
        const auto k = static_cast<std::size_t>(it - record.entries.begin());
        const double scale = has_meta ? record.safety_margin * record.nominal[k] : 1.0;

        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        const auto extend = [&](double v) {
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        };
        for (const auto& row : record.rows) {
            extend(row.raw[k]);
            if (has_meta) extend(row.ref[k] * scale);
        }
        if (has_meta) {
            extend(scale);
            extend(record.nonnegative[k] ? 0.0 : -scale);
        }
        if (!(lo < hi)) {
            lo = std::isfinite(lo) ? lo - 1.0 : -1.0;
            hi = lo + 2.0;
        }
        const double top = gap + static_cast<double>(p) * (panel + gap);
        const auto x_of = [&](double t) { return left + (t - t0) / t_span * (width - left - right); };
        const auto y_of = [&](double v) { return top + (hi - v) / (hi - lo) * panel; };

        svg << "<g>\n<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right
            << "\" height=\"" << panel << "\" fill=\"none\" stroke=\"#888\"/>\n"
            << "<text x=\"5\" y=\"" << top + 15 << "\" font-size=\"12\" font-family=\"sans-serif\">" << entries[p]
            << "</text>\n"
            << "<text x=\"5\" y=\"" << top + panel << "\" font-size=\"10\" font-family=\"sans-serif\">" << lo
            << "</text>\n"
            << "<text x=\"5\" y=\"" << top + 30 << "\" font-size=\"10\" font-family=\"sans-serif\">" << hi
            << "</text>\n";

        const auto hline = [&](double v, const char* color, const char* dash) {
            svg << "<line x1=\"" << left << "\" y1=\"" << y_of(v) << "\" x2=\"" << width - right << "\" y2=\""
                << y_of(v) << "\" stroke=\"" << color << "\" stroke-dasharray=\"" << dash << "\"/>\n";
        };
        if (has_meta) {
            const double nominal = record.nominal[k];
            hline(nominal, "#d4b000", "2,3");
            hline(scale, "#cc0000", "8,4");
            if (!record.nonnegative[k]) {
                hline(-nominal, "#d4b000", "2,3");
                hline(-scale, "#cc0000", "8,4");
            }
        }

        const auto polyline = [&](auto value_of, const char* color) {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
            bool any = false;
            for (std::size_t i = 0; i < n; i += stride) {
                const double v = value_of(record.rows[i]);
                if (!std::isfinite(v)) continue;
                svg << (any ? " " : "") << x_of(record.rows[i].time) << ',' << y_of(v);
                any = true;
            }
            svg << "\"/>\n";
        };
        if (has_meta && !std::isnan(n ? record.rows.front().ref[k] : kNaN)) {
            polyline([&](const TrajectoryRow& r) { return r.ref[k] * scale; }, "#20a020");
        }
        polyline([&](const TrajectoryRow& r) { return r.raw[k]; }, "#1f4fd0");
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_plot(const TrajectoryRecord& record, const std::vector<std::string>& entries,
                const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << plot_svg(record, entries);
    if (!out) throw InputError("write to '" + path.string() + "' failed");
}

}  // namespace drivegym
