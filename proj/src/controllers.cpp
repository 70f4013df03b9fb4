#include "drivegym/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "drivegym/errors.hpp"

namespace drivegym {

namespace {

constexpr double kSymmetricOptimumA = 2.0;

PiGains magnitude_optimum(double l, double r, double t_sigma)
{
    const double kp = l / (2.0 * t_sigma);
    return {kp, kp / (l / r)};
}

std::size_t reference_index(const Environment& env, std::size_t entry)
{
    const auto& tracked = env.tracked();
    const auto it = std::find(tracked.begin(), tracked.end(), entry);
    if (it == tracked.end()) throw UsageError("entry has no reference");
    const auto slot = static_cast<std::size_t>(it - tracked.begin());
    return env.config().entry_count() + slot * env.config().prediction_horizon;
}

bool is_tracked(const Environment& env, std::size_t entry)
{
    const auto& tracked = env.tracked();
    return std::find(tracked.begin(), tracked.end(), entry) != tracked.end();
}

}  // namespace

CascadeTuning tune_pi(const MotorModel& motor, const LoadParams& load, double tau,
                      std::span<const double> nominal_values)
{
    if (!is_dc(motor.kind)) throw ConfigError("PI cascade is only available for DC motors");
    if (!(tau > 0.0)) throw ConfigError("PI tuning needs tau > 0");
    const auto& p = motor.dc;
    CascadeTuning t;
    t.t_sigma = 1.5 * tau;
    switch (motor.kind) {
    case MotorKind::Series:
        t.l_circuit = p.l_a + p.l_e;
        t.r_circuit = p.r_a + p.r_e;
        t.torque_constant = p.l_e_prime * nominal_values[2];
        break;
    case MotorKind::ExternallyExcited:
        t.l_circuit = p.l_a;
        t.r_circuit = p.r_a;
        t.torque_constant = p.l_e_prime * nominal_values[3];
        break;
    case MotorKind::Shunt:
        t.l_circuit = p.l_a;
        t.r_circuit = p.r_a;
        t.torque_constant = p.l_e_prime * nominal_values[4] / p.r_e;
        break;
    case MotorKind::PermanentlyExcited:
        t.l_circuit = p.l_a;
        t.r_circuit = p.r_a;
        t.torque_constant = p.psi_e_prime;
        break;
    case MotorKind::Pmsm: break;
    }
    if (!(t.l_circuit > 0.0) || !(t.r_circuit > 0.0) || !std::isfinite(t.l_circuit / t.r_circuit)) {
        throw ConfigError("degenerate electrical time constant for PI tuning");
    }
    if (!(t.torque_constant > 0.0)) throw ConfigError("degenerate torque constant for PI tuning");
    const double j = p.j_rotor + load.j_load;
    if (!(j > 0.0)) throw ConfigError("degenerate inertia for PI tuning");

    t.current = magnitude_optimum(t.l_circuit, t.r_circuit, t.t_sigma);
    const double t_ei = 2.0 * t.t_sigma;
    const double a = kSymmetricOptimumA;
    t.speed.kp = j / (a * t.torque_constant * t_ei);
    t.speed.ki = t.speed.kp / (a * a * t_ei);
    if (motor.kind == MotorKind::ExternallyExcited) t.excitation = magnitude_optimum(p.l_e, p.r_e, t.t_sigma);
    return t;
}

void PiCascadeState::reset_integrators()
{
    speed_integral = 0.0;
    current_integral = 0.0;
    current_reference = 0.0;
}

double pi_step(const PiGains& gains, double& integral, double error, double feedforward, double low, double high,
               double tau)
{
    const double raw = gains.kp * error + integral + feedforward;
    const bool push_high = raw > high && error > 0.0;
    const bool push_low = raw < low && error < 0.0;
    if (!push_high && !push_low) integral += gains.ki * tau * error;
    return std::clamp(raw, low, high);
}

double pi_current_act(PiCascadeState& s, double i_norm, double i_ref_norm, double tau, double emf)
{
    const double error = (i_ref_norm - i_norm) * s.current_scale;
    const double u = pi_step(s.tuning.current, s.current_integral, error, emf, s.duty_low * s.u_sup,
                             s.duty_high * s.u_sup, tau);
    return u / s.u_sup;
}

double pi_act(PiCascadeState& s, double omega_norm, double omega_ref_norm, double i_norm, double i_limit_norm,
              double tau, double emf)
{
    const double limit = i_limit_norm * s.current_scale;
    const double floor = s.bipolar_current ? -limit : 0.0;
    const double speed_error = (omega_ref_norm - omega_norm) * s.omega_scale;
    const double i_ref = pi_step(s.tuning.speed, s.speed_integral, speed_error, 0.0, floor, limit, tau);
    s.current_reference = i_ref / s.current_scale;
    return pi_current_act(s, i_norm, s.current_reference, tau, emf);
}

int hysteresis_act(HysteresisState& s, double tracked_norm, double ref_norm)
{
    if (tracked_norm < ref_norm - s.band) {
        s.last_command = s.on_command;
    } else if (tracked_norm > ref_norm + s.band) {
        s.last_command = s.off_command;
    }
    return s.last_command;
}

void PiCascadeController::reset(const Environment& env)
{
    const auto& cfg = env.config();
    if (cfg.converter.mode != ActionMode::Continuous) throw ConfigError("pi controller needs continuous actions");
    motor_ = cfg.motor;
    tau_ = cfg.tau();
    scale_.resize(cfg.entry_count());
    for (std::size_t k = 0; k < scale_.size(); ++k) scale_[k] = cfg.safety_margin * cfg.nominal_values[k];

    state_ = {};
    state_.tuning = tune_pi(cfg.motor, cfg.load, tau_, cfg.nominal_values);
    if (options_.current_kp) state_.tuning.current.kp = *options_.current_kp;
    if (options_.current_ki) state_.tuning.current.ki = *options_.current_ki;
    if (options_.speed_kp) state_.tuning.speed.kp = *options_.speed_kp;
    if (options_.speed_ki) state_.tuning.speed.ki = *options_.speed_ki;
    state_.omega_scale = scale_[0];
    state_.current_scale = scale_[2];
    state_.u_sup = cfg.converter.u_sup;
    const auto& space = env.action_space();
    state_.duty_low = space.low;
    state_.duty_high = space.high;
    state_.bipolar_current = !env.nonnegative()[2];
    state_.reset_integrators();
    i_limit_norm_ = 1.0 / cfg.safety_margin;

    current_entry_ = 2;
    if (is_tracked(env, 0)) {
        speed_mode_ = true;
        ref_index_ = reference_index(env, 0);
    } else if (is_tracked(env, 2)) {
        speed_mode_ = false;
        ref_index_ = reference_index(env, 2);
    } else {
        throw ConfigError("pi controller needs a reference on omega or on the armature current");
    }

    if (cfg.motor.kind == MotorKind::ExternallyExcited) {
        excitation_ = state_;
        excitation_.tuning.current = state_.tuning.excitation;
        excitation_.current_scale = scale_[3];
        excitation_.reset_integrators();
        i_e_ref_norm_ = 1.0 / cfg.safety_margin;
    }
}

Action PiCascadeController::act(std::span<const double> obs)
{
    const double omega = obs[0] * scale_[0];
    const auto& p = motor_.dc;
    double emf = 0.0;
    switch (motor_.kind) {
    case MotorKind::Series: emf = p.l_e_prime * obs[2] * scale_[2] * omega; break;
    case MotorKind::ExternallyExcited:
    case MotorKind::Shunt: emf = p.l_e_prime * obs[3] * scale_[3] * omega; break;
    case MotorKind::PermanentlyExcited: emf = p.psi_e_prime * omega; break;
    case MotorKind::Pmsm: break;
    }
    const double ref = obs[ref_index_];
    const double duty = speed_mode_ ? pi_act(state_, obs[0], ref, obs[current_entry_], i_limit_norm_, tau_, emf)
                                    : pi_current_act(state_, obs[current_entry_], ref, tau_, emf);
    if (motor_.kind != MotorKind::ExternallyExcited) return StateVec{duty};
    const double ff = p.r_e * i_e_ref_norm_ * scale_[3];
    const double duty_e = pi_current_act(excitation_, obs[3], i_e_ref_norm_, tau_, ff);
    return StateVec{duty, duty_e};
}

void HysteresisController::reset(const Environment& env)
{
    const auto& cfg = env.config();
    if (cfg.converter.mode != ActionMode::Discrete) throw ConfigError("hysteresis controller needs discrete actions");
    if (!is_dc(cfg.motor.kind)) throw ConfigError("hysteresis controller is only available for DC motors");
    if (env.tracked().empty()) throw ConfigError("hysteresis controller needs a tracked entry");
    state_ = {};
    if (options_.band) state_.band = *options_.band;
    if (!(state_.band > 0.0)) throw ConfigError("hysteresis band must be > 0");
    entry_ = env.tracked().front();
    ref_index_ = reference_index(env, entry_);
    if (cfg.motor.kind == MotorKind::ExternallyExcited) {
        // Excitation permanently switched on; the armature channel toggles.
        const int card = switching_states(cfg.converter.topology);
        state_.on_command = 1 * card + 1;
        state_.off_command = 0 * card + 1;
    }
    state_.last_command = state_.off_command;
}

Action HysteresisController::act(std::span<const double> obs)
{
    return hysteresis_act(state_, obs[entry_], obs[ref_index_]);
}

void OracleController::reset(const Environment& env)
{
    if (env.config().converter.mode != ActionMode::Continuous) throw ConfigError("oracle needs continuous actions");
    duties_ = env.references().duties;
    if (duties_.empty()) throw UsageError("oracle needs a random-fourier reference");
    t_ = 0;
}

Action OracleController::act(std::span<const double>)
{
    if (t_ >= duties_.size()) throw UsageError("oracle ran past its duty sequence");
    return duties_[t_++];
}

void ZeroController::reset(const Environment& env)
{
    zero_ = zero_action(env.config().converter, env.config().dc_channels());
}

Action ZeroController::act(std::span<const double>) { return zero_; }

void ExternalController::reset(const Environment& env)
{
    mode_ = env.action_space().mode;
    channels_ = env.action_space().channels;
}

Action ExternalController::act(std::span<const double> observation)
{
    nlohmann::json request;
    request["observation"] = std::vector<double>(observation.begin(), observation.end());
    out_ << request.dump() << '\n' << std::flush;

    std::string line;
    if (!std::getline(in_, line)) throw InputError("external controller closed its output");
    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("external controller sent invalid JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("action")) throw InputError("external reply lacks \"action\"");
    const auto& a = reply["action"];
    if (mode_ == ActionMode::Discrete) {
        if (!a.is_number_integer()) throw InputError("discrete action must be an integer");
        return a.get<int>();
    }
    if (!a.is_array() || a.size() != channels_) {
        throw InputError("continuous action must be an array of " + std::to_string(channels_) + " number(s)");
    }
    StateVec duty(channels_);
    for (std::size_t k = 0; k < channels_; ++k) {
        if (!a[k].is_number()) throw InputError("continuous action entries must be numbers");
        duty[k] = a[k].get<double>();
    }
    return duty;
}

std::unique_ptr<Controller> make_controller(std::string_view name, const ControllerOptions& options)
{
    if (name == "pi") return std::make_unique<PiCascadeController>(options);
    if (name == "hysteresis") return std::make_unique<HysteresisController>(options);
    if (name == "oracle") return std::make_unique<OracleController>();
    if (name == "zero") return std::make_unique<ZeroController>();
    throw ConfigError("unknown controller '" + std::string(name) + "'");
}

}  // namespace drivegym
