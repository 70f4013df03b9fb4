#include "drivegym/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "drivegym/errors.hpp"

namespace drivegym {

using nlohmann::json;

namespace {

ActionMode mode_from_name(std::string_view s)
{
    if (s == "cont" || s == "continuous") return ActionMode::Continuous;
    if (s == "disc" || s == "discrete") return ActionMode::Discrete;
    throw ConfigError("unknown action mode '" + std::string(s) + "'");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown configuration key '" + where + key + "'");
    }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("invalid value for '" + where + key + "': " + e.what());
    }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where = "")
{
    if (obj.contains(key)) out = get<T>(obj, key, where);
}

/// Reads an {entry: value} map into a per-entry vector.
void read_entry_map(const json& obj, const char* key, const EnvConfig& cfg, std::vector<double>& out)
{
    if (!obj.contains(key)) return;
    const auto& m = obj.at(key);
    if (!m.is_object()) throw ConfigError(std::string("'") + key + "' must map entry names to numbers");
    for (const auto& [name, value] : m.items()) {
        std::size_t idx = 0;
        try {
            idx = cfg.entry_index(name);
        } catch (const ConfigError&) {
            throw ConfigError("unknown configuration key '" + std::string(key) + "." + name + "'");
        }
        if (!value.is_number()) throw ConfigError(std::string("'") + key + "." + name + "' must be a number");
        out[idx] = value.get<double>();
    }
}

json entry_map(const EnvConfig& cfg, const std::vector<double>& values)
{
    json m = json::object();
    const auto& entries = env_entries(cfg.motor.kind);
    for (std::size_t k = 0; k < entries.size(); ++k) m[entries[k].name] = values[k];
    return m;
}

}  // namespace

std::string_view reward_name(RewardFunction f)
{
    switch (f) {
    case RewardFunction::Wsae: return "wsae";
    case RewardFunction::Wsse: return "wsse";
    case RewardFunction::Swsae: return "swsae";
    case RewardFunction::Swsse: return "swsse";
    }
    return "?";
}

RewardFunction reward_from_name(std::string_view name)
{
    for (auto f : {RewardFunction::Wsae, RewardFunction::Wsse, RewardFunction::Swsae, RewardFunction::Swsse}) {
        if (reward_name(f) == name) return f;
    }
    throw ConfigError("unknown reward function '" + std::string(name) + "'");
}

std::string_view shape_name(ShapeKind s)
{
    switch (s) {
    case ShapeKind::Sinusoidal: return "sinusoidal";
    case ShapeKind::Triangular: return "triangular";
    case ShapeKind::Rectangular: return "rectangular";
    case ShapeKind::Sawtooth: return "sawtooth";
    case ShapeKind::RandomFourier: return "random_fourier";
    }
    return "?";
}

std::size_t EnvConfig::entry_index(std::string_view name) const
{
    const auto& entries = env_entries(motor.kind);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (entries[k].name == name) return k;
    }
    throw ConfigError("motor " + std::string(motor_name(motor.kind)) + " has no state entry '" + std::string(name) +
                      "'");
}

std::vector<double> default_nominal_values(const MotorModel& motor, const ConverterSpec& converter)
{
    const double u = converter.topology == Topology::B6 ? 0.5 * converter.u_sup : converter.u_sup;
    switch (motor.kind) {
    case MotorKind::Series: return {368.0, 250.0, 50.0, u, converter.u_sup};
    case MotorKind::ExternallyExcited: return {368.0, 56.4, 50.0, 1.2, u, u, converter.u_sup};
    case MotorKind::Shunt: return {368.0, 56.4, 50.0, 1.2, u, converter.u_sup};
    case MotorKind::PermanentlyExcited: return {22.0, 288.0, 16.0, u, converter.u_sup};
    case MotorKind::Pmsm:
        return {3.0 * 100.0 * std::numbers::pi, 161.0, 240.0, 240.0, 240.0, u, u, u, converter.u_sup,
                2.0 * std::numbers::pi};
    }
    return {};
}

EnvConfig default_config(MotorKind kind, ActionMode mode)
{
    EnvConfig cfg;
    cfg.motor = default_motor(kind);
    cfg.converter.mode = mode;
    switch (kind) {
    case MotorKind::Series: cfg.converter.topology = Topology::OneQuadrant; break;
    case MotorKind::Pmsm:
        cfg.converter.topology = Topology::B6;
        cfg.converter.u_sup = 300.0;
        break;
    default: cfg.converter.topology = Topology::FourQuadrant; break;
    }
    const std::size_t n = env_entries(kind).size();
    cfg.nominal_values = default_nominal_values(cfg.motor, cfg.converter);
    cfg.reward_weights.assign(n, 0.0);
    cfg.reward_weights[0] = 1.0;
    cfg.noise_levels.assign(n, 0.0);
    cfg.zero_reference.assign(n, false);
    return cfg;
}

EnvConfig config_from_id(std::string_view id)
{
    const auto first = id.find('-');
    const auto second = id.find('-', first == std::string_view::npos ? first : first + 1);
    if (first == std::string_view::npos || second == std::string_view::npos || id.substr(second + 1) != "v0") {
        throw ConfigError("environment id '" + std::string(id) + "' does not match <motor>-<cont|disc>-v0");
    }
    const auto motor = id.substr(0, first);
    const auto mode = id.substr(first + 1, second - first - 1);
    if (mode != "cont" && mode != "disc") throw ConfigError("unknown action mode in id '" + std::string(id) + "'");
    return default_config(motor_from_name(motor), mode_from_name(mode));
}

std::string env_id(const EnvConfig& cfg)
{
    return std::string(motor_name(cfg.motor.kind)) +
           (cfg.converter.mode == ActionMode::Continuous ? "-cont-v0" : "-disc-v0");
}

std::vector<std::string> EnvConfig::validate() const
{
    std::vector<std::string> warnings;
    motor.validate();
    integrator.validate();
    const std::size_t n = entry_count();

    if (!(converter.u_sup > 0.0)) throw ConfigError("u_sup must be positive");
    if (converter.interlocking_time < 0.0 || !(converter.interlocking_time < integrator.tau)) {
        throw ConfigError("interlocking_time must lie in [0, tau)");
    }
    if ((converter.topology == Topology::B6) != (motor.kind == MotorKind::Pmsm)) {
        throw ConfigError("converter " + std::string(topology_name(converter.topology)) + " cannot feed motor " +
                          std::string(motor_name(motor.kind)));
    }
    if (!(load.a >= 0.0 && load.b >= 0.0 && load.c >= 0.0 && load.j_load >= 0.0)) {
        throw ConfigError("load parameters a, b, c, j_load must be >= 0");
    }
    if (episode_length < 1) throw ConfigError("episode_length must be >= 1");
    if (prediction_horizon < 1) throw ConfigError("prediction_horizon must be >= 1");
    if (!(safety_margin >= 1.0)) throw ConfigError("safety_margin must be >= 1");
    if (reward_weights.size() != n || nominal_values.size() != n || noise_levels.size() != n ||
        zero_reference.size() != n) {
        throw ConfigError("per-entry vectors must have one value per environment-state entry");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!(reward_weights[k] >= 0.0)) throw ConfigError("reward weights must be >= 0");
        if (!(nominal_values[k] > 0.0)) throw ConfigError("nominal values must be positive");
        if (!(noise_levels[k] >= 0.0)) throw ConfigError("noise levels must be >= 0");
    }
    const double wsum = std::accumulate(reward_weights.begin(), reward_weights.end(), 0.0);
    if (std::abs(wsum - 1.0) > 1e-9) {
        warnings.push_back("reward weights sum to " + std::to_string(wsum) +
                           ", rewards leave their nominal range unless they sum to 1");
    }
    switch (penalty.mode) {
    case PenaltyMode::Zero: break;
    case PenaltyMode::Constant:
        if (!(penalty.constant < 0.0)) throw ConfigError("constant limit penalty must be negative");
        break;
    case PenaltyMode::QBased:
        if (!(penalty.gamma > 0.0 && penalty.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
        break;
    }
    if (penalty.mode == PenaltyMode::Zero &&
        (reward_function == RewardFunction::Wsae || reward_function == RewardFunction::Wsse)) {
        warnings.push_back("zero limit penalty with a negative reward function rewards early violations");
    }
    double psum = 0.0;
    for (double p : reference.shape_probabilities) {
        if (!(p >= 0.0)) throw ConfigError("shape probabilities must be >= 0");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-9) throw ConfigError("shape probabilities must sum to 1");
    if (!(reference.period_min_fraction > 0.0 && reference.period_min_fraction <= reference.period_max_fraction)) {
        throw ConfigError("reference period fractions must satisfy 0 < min <= max");
    }
    if (reference.max_retries < 0) throw ConfigError("reference max_retries must be >= 0");
    return warnings;
}

EnvConfig config_from_json(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    reject_unknown(doc,
                   {"env_id", "motor", "action_mode", "converter", "u_sup", "dead_time", "interlocking_time",
                    "motor_params", "load_params", "tau", "integrator", "rtol", "atol", "episode_length",
                    "prediction_horizon", "reward_function", "reward_weights", "safety_margin", "nominal_values",
                    "noise_levels", "limit_penalty", "penalty_constant", "gamma", "zero_reference", "seed",
                    "reference"},
                   "");

    EnvConfig cfg;
    if (doc.contains("env_id")) {
        if (doc.contains("motor") || doc.contains("action_mode")) {
            throw ConfigError("give either env_id or motor/action_mode, not both");
        }
        cfg = config_from_id(get<std::string>(doc, "env_id", ""));
    } else {
        const auto motor = doc.contains("motor") ? get<std::string>(doc, "motor", "") : std::string("series");
        const auto mode = doc.contains("action_mode") ? get<std::string>(doc, "action_mode", "") : std::string("cont");
        cfg = default_config(motor_from_name(motor), mode_from_name(mode));
    }

    if (doc.contains("converter")) cfg.converter.topology = topology_from_name(get<std::string>(doc, "converter", ""));
    read_opt(doc, "u_sup", cfg.converter.u_sup);
    read_opt(doc, "dead_time", cfg.converter.dead_time);
    read_opt(doc, "interlocking_time", cfg.converter.interlocking_time);

    if (doc.contains("motor_params")) {
        const auto& mp = doc.at("motor_params");
        if (cfg.motor.kind == MotorKind::Pmsm) {
            reject_unknown(mp, {"r_s", "l_d", "l_q", "pole_pairs", "psi_p", "j_rotor"}, "motor_params.");
            read_opt(mp, "r_s", cfg.motor.pmsm.r_s, "motor_params.");
            read_opt(mp, "l_d", cfg.motor.pmsm.l_d, "motor_params.");
            read_opt(mp, "l_q", cfg.motor.pmsm.l_q, "motor_params.");
            read_opt(mp, "pole_pairs", cfg.motor.pmsm.pole_pairs, "motor_params.");
            read_opt(mp, "psi_p", cfg.motor.pmsm.psi_p, "motor_params.");
            read_opt(mp, "j_rotor", cfg.motor.pmsm.j_rotor, "motor_params.");
        } else {
            reject_unknown(mp, {"r_a", "r_e", "l_a", "l_e", "l_e_prime", "psi_e_prime", "j_rotor"}, "motor_params.");
            read_opt(mp, "r_a", cfg.motor.dc.r_a, "motor_params.");
            read_opt(mp, "r_e", cfg.motor.dc.r_e, "motor_params.");
            read_opt(mp, "l_a", cfg.motor.dc.l_a, "motor_params.");
            read_opt(mp, "l_e", cfg.motor.dc.l_e, "motor_params.");
            read_opt(mp, "l_e_prime", cfg.motor.dc.l_e_prime, "motor_params.");
            read_opt(mp, "psi_e_prime", cfg.motor.dc.psi_e_prime, "motor_params.");
            read_opt(mp, "j_rotor", cfg.motor.dc.j_rotor, "motor_params.");
        }
    }
    if (doc.contains("load_params")) {
        const auto& lp = doc.at("load_params");
        reject_unknown(lp, {"a", "b", "c", "j_load"}, "load_params.");
        read_opt(lp, "a", cfg.load.a, "load_params.");
        read_opt(lp, "b", cfg.load.b, "load_params.");
        read_opt(lp, "c", cfg.load.c, "load_params.");
        read_opt(lp, "j_load", cfg.load.j_load, "load_params.");
    }

    read_opt(doc, "tau", cfg.integrator.tau);
    if (doc.contains("integrator")) cfg.integrator.method = integrator_from_name(get<std::string>(doc, "integrator", ""));
    read_opt(doc, "rtol", cfg.integrator.rtol);
    read_opt(doc, "atol", cfg.integrator.atol);
    read_opt(doc, "episode_length", cfg.episode_length);
    read_opt(doc, "prediction_horizon", cfg.prediction_horizon);
    if (doc.contains("reward_function")) {
        cfg.reward_function = reward_from_name(get<std::string>(doc, "reward_function", ""));
    }
    read_opt(doc, "safety_margin", cfg.safety_margin);

    // Voltage nominal values follow u_sup unless given explicitly.
    cfg.nominal_values = default_nominal_values(cfg.motor, cfg.converter);
    if (doc.contains("reward_weights")) std::fill(cfg.reward_weights.begin(), cfg.reward_weights.end(), 0.0);
    read_entry_map(doc, "reward_weights", cfg, cfg.reward_weights);
    read_entry_map(doc, "nominal_values", cfg, cfg.nominal_values);
    read_entry_map(doc, "noise_levels", cfg, cfg.noise_levels);

    if (doc.contains("limit_penalty")) {
        const auto mode = get<std::string>(doc, "limit_penalty", "");
        if (mode == "zero") cfg.penalty.mode = PenaltyMode::Zero;
        else if (mode == "constant") cfg.penalty.mode = PenaltyMode::Constant;
        else if (mode == "q_based") cfg.penalty.mode = PenaltyMode::QBased;
        else throw ConfigError("unknown limit_penalty '" + mode + "'");
    }
    read_opt(doc, "penalty_constant", cfg.penalty.constant);
    read_opt(doc, "gamma", cfg.penalty.gamma);

    if (doc.contains("zero_reference")) {
        for (const auto& name : get<std::vector<std::string>>(doc, "zero_reference", "")) {
            cfg.zero_reference[cfg.entry_index(name)] = true;
        }
    }
    read_opt(doc, "seed", cfg.seed);

    if (doc.contains("reference")) {
        const auto& r = doc.at("reference");
        reject_unknown(r,
                       {"shape_probabilities", "period_min_fraction", "period_max_fraction", "fourier_cutoff_hz",
                        "max_retries"},
                       "reference.");
        if (r.contains("shape_probabilities")) {
            const auto p = get<std::vector<double>>(r, "shape_probabilities", "reference.");
            if (p.size() != kShapeCount) throw ConfigError("reference.shape_probabilities needs 5 values");
            std::copy(p.begin(), p.end(), cfg.reference.shape_probabilities.begin());
        }
        read_opt(r, "period_min_fraction", cfg.reference.period_min_fraction, "reference.");
        read_opt(r, "period_max_fraction", cfg.reference.period_max_fraction, "reference.");
        read_opt(r, "fourier_cutoff_hz", cfg.reference.fourier_cutoff_hz, "reference.");
        read_opt(r, "max_retries", cfg.reference.max_retries, "reference.");
    }

    cfg.validate();
    return cfg;
}

EnvConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::string config_to_json(const EnvConfig& cfg)
{
    json doc;
    doc["env_id"] = env_id(cfg);
    doc["converter"] = std::string(topology_name(cfg.converter.topology));
    doc["u_sup"] = cfg.converter.u_sup;
    doc["dead_time"] = cfg.converter.dead_time;
    doc["interlocking_time"] = cfg.converter.interlocking_time;
    if (cfg.motor.kind == MotorKind::Pmsm) {
        const auto& p = cfg.motor.pmsm;
        doc["motor_params"] = {{"r_s", p.r_s},         {"l_d", p.l_d},     {"l_q", p.l_q},
                               {"pole_pairs", p.pole_pairs}, {"psi_p", p.psi_p}, {"j_rotor", p.j_rotor}};
    } else {
        const auto& p = cfg.motor.dc;
        doc["motor_params"] = {{"r_a", p.r_a},           {"r_e", p.r_e},
                               {"l_a", p.l_a},           {"l_e", p.l_e},
                               {"l_e_prime", p.l_e_prime}, {"psi_e_prime", p.psi_e_prime},
                               {"j_rotor", p.j_rotor}};
    }
    doc["load_params"] = {{"a", cfg.load.a}, {"b", cfg.load.b}, {"c", cfg.load.c}, {"j_load", cfg.load.j_load}};
    doc["tau"] = cfg.integrator.tau;
    doc["integrator"] = std::string(integrator_name(cfg.integrator.method));
    doc["rtol"] = cfg.integrator.rtol;
    doc["atol"] = cfg.integrator.atol;
    doc["episode_length"] = cfg.episode_length;
    doc["prediction_horizon"] = cfg.prediction_horizon;
    doc["reward_function"] = std::string(reward_name(cfg.reward_function));
    doc["reward_weights"] = entry_map(cfg, cfg.reward_weights);
    doc["safety_margin"] = cfg.safety_margin;
    doc["nominal_values"] = entry_map(cfg, cfg.nominal_values);
    doc["noise_levels"] = entry_map(cfg, cfg.noise_levels);
    doc["limit_penalty"] = cfg.penalty.mode == PenaltyMode::Zero       ? "zero"
                           : cfg.penalty.mode == PenaltyMode::Constant ? "constant"
                                                                       : "q_based";
    doc["penalty_constant"] = cfg.penalty.constant;
    doc["gamma"] = cfg.penalty.gamma;
    json zero = json::array();
    const auto& entries = env_entries(cfg.motor.kind);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (cfg.zero_reference[k]) zero.push_back(entries[k].name);
    }
    doc["zero_reference"] = zero;
    doc["seed"] = cfg.seed;
    doc["reference"] = {{"shape_probabilities", cfg.reference.shape_probabilities},
                        {"period_min_fraction", cfg.reference.period_min_fraction},
                        {"period_max_fraction", cfg.reference.period_max_fraction},
                        {"fourier_cutoff_hz", cfg.reference.fourier_cutoff_hz},
                        {"max_retries", cfg.reference.max_retries}};
    return doc.dump(2);
}

}  // namespace drivegym
