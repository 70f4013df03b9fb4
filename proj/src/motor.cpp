#include "drivegym/motor.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "drivegym/errors.hpp"
#include "drivegym/transforms.hpp"

namespace drivegym {

namespace {

double signum(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

void require_positive(double value, const char* what)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string("motor parameter '") + what + "' must be positive and finite");
    }
}

void require_finite(const StateVec& state)
{
    if (!state.all_finite()) throw NumericalError("non-finite motor state");
}

void require_inputs(const MotorModel& model, std::span<const double> u_in)
{
    if (u_in.size() != model.input_size()) {
        throw ConfigError("motor " + std::string(motor_name(model.kind)) + " expects " +
                          std::to_string(model.input_size()) + " input voltage(s), got " + std::to_string(u_in.size()));
    }
}

}  // namespace

std::string_view motor_name(MotorKind kind)
{
    switch (kind) {
    case MotorKind::ExternallyExcited: return "extex";
    case MotorKind::Shunt: return "shunt";
    case MotorKind::Series: return "series";
    case MotorKind::PermanentlyExcited: return "permex";
    case MotorKind::Pmsm: return "pmsm";
    }
    return "unknown";
}

MotorKind motor_from_name(std::string_view name)
{
    for (auto kind : {MotorKind::ExternallyExcited, MotorKind::Shunt, MotorKind::Series,
                      MotorKind::PermanentlyExcited, MotorKind::Pmsm}) {
        if (motor_name(kind) == name) return kind;
    }
    throw ConfigError("unknown motor '" + std::string(name) + "'");
}

void MotorModel::validate() const
{
    if (kind == MotorKind::Pmsm) {
        require_positive(pmsm.r_s, "r_s");
        require_positive(pmsm.l_d, "l_d");
        require_positive(pmsm.l_q, "l_q");
        require_positive(pmsm.j_rotor, "j_rotor");
        if (pmsm.pole_pairs < 1) throw ConfigError("motor parameter 'pole_pairs' must be >= 1");
        if (!std::isfinite(pmsm.psi_p)) throw ConfigError("motor parameter 'psi_p' must be finite");
        return;
    }
    require_positive(dc.r_a, "r_a");
    require_positive(dc.l_a, "l_a");
    require_positive(dc.j_rotor, "j_rotor");
    if (kind == MotorKind::PermanentlyExcited) {
        if (!(dc.psi_e_prime >= 0.0)) throw ConfigError("motor parameter 'psi_e_prime' must be >= 0");
        return;
    }
    require_positive(dc.r_e, "r_e");
    require_positive(dc.l_e, "l_e");
    require_positive(dc.l_e_prime, "l_e_prime");
}

std::size_t MotorModel::state_size() const
{
    switch (kind) {
    case MotorKind::ExternallyExcited:
    case MotorKind::Shunt: return 3;
    case MotorKind::Series:
    case MotorKind::PermanentlyExcited: return 2;
    case MotorKind::Pmsm: return 4;
    }
    return 0;
}

std::size_t MotorModel::input_size() const
{
    switch (kind) {
    case MotorKind::ExternallyExcited: return 2;
    case MotorKind::Pmsm: return 3;
    default: return 1;
    }
}

MotorModel default_motor(MotorKind kind)
{
    MotorModel model;
    model.kind = kind;
    switch (kind) {
    case MotorKind::Series:
        break;
    case MotorKind::ExternallyExcited:
    case MotorKind::Shunt:
        model.dc = DcMotorParams{2.78, 350.0, 6.3e-3, 160.0, 0.94, 0.0, 0.017};
        break;
    case MotorKind::PermanentlyExcited:
        model.dc = DcMotorParams{25.0, 1.0, 3.438e-2, 1.0, 0.0, 18.0, 0.017};
        break;
    case MotorKind::Pmsm:
        break;
    }
    return model;
}

double mechanical_speed(const MotorModel& model, const StateVec& state)
{
    switch (model.kind) {
    case MotorKind::ExternallyExcited:
    case MotorKind::Shunt: return state[state_index::kDcOmegaTwoCircuit];
    case MotorKind::Series:
    case MotorKind::PermanentlyExcited: return state[state_index::kDcOmegaOneCircuit];
    case MotorKind::Pmsm: return state[state_index::kOmegaMe];
    }
    return 0.0;
}

double load_torque(const LoadParams& load, double omega_me)
{
    const double s = signum(omega_me);
    return s * (load.c * omega_me * omega_me + s * load.b * omega_me + load.a);
}

double torque(const MotorModel& model, const StateVec& state)
{
    require_finite(state);
    const auto& dc = model.dc;
    switch (model.kind) {
    case MotorKind::ExternallyExcited:
    case MotorKind::Shunt:
        return dc.l_e_prime * state[state_index::kExcitation] * state[state_index::kArmature];
    case MotorKind::Series: {
        const double i = state[0];
        return dc.l_e_prime * i * i;
    }
    case MotorKind::PermanentlyExcited: return dc.psi_e_prime * state[0];
    case MotorKind::Pmsm: {
        const auto& pm = model.pmsm;
        return 1.5 * pm.pole_pairs * (pm.psi_p + (pm.l_d - pm.l_q) * state[state_index::kIsd]) *
               state[state_index::kIsq];
    }
    }
    return 0.0;
}

StateVec motor_derivative(const MotorModel& model, const StateVec& state, std::span<const double> u_in,
                          const LoadParams& load)
{
    require_inputs(model, u_in);
    require_finite(state);
    if (state.size() != model.state_size()) throw ConfigError("motor state has the wrong dimension");

    const double inertia = model.rotor_inertia() + load.j_load;
    const double t_motor = torque(model, state);
    const auto& dc = model.dc;
    StateVec dx(state.size());

    switch (model.kind) {
    case MotorKind::ExternallyExcited:
    case MotorKind::Shunt: {
        const double u_a = u_in[0];
        const double u_e = model.kind == MotorKind::Shunt ? u_in[0] : u_in[1];
        const double i_a = state[0];
        const double i_e = state[1];
        const double omega = state[2];
        dx[0] = (u_a - dc.l_e_prime * i_e * omega - dc.r_a * i_a) / dc.l_a;
        dx[1] = (u_e - dc.r_e * i_e) / dc.l_e;
        dx[2] = (t_motor - load_torque(load, omega)) / inertia;
        break;
    }
    case MotorKind::Series: {
        const double i = state[0];
        const double omega = state[1];
        dx[0] = (-dc.l_e_prime * i * omega - (dc.r_a + dc.r_e) * i + u_in[0]) / (dc.l_a + dc.l_e);
        dx[1] = (t_motor - load_torque(load, omega)) / inertia;
        break;
    }
    case MotorKind::PermanentlyExcited: {
        const double i = state[0];
        const double omega = state[1];
        dx[0] = (-dc.psi_e_prime * omega - dc.r_a * i + u_in[0]) / dc.l_a;
        dx[1] = (t_motor - load_torque(load, omega)) / inertia;
        break;
    }
    case MotorKind::Pmsm: {
        const auto& pm = model.pmsm;
        const double i_sd = state[0];
        const double i_sq = state[1];
        const double omega_me = state[2];
        const double eps_el = pm.pole_pairs * state[3];
        const auto ab = clarke_forward({u_in[0], u_in[1], u_in[2]});
        const auto u_dq = park_forward({ab.alpha, ab.beta}, eps_el);
        const double omega_el = pm.pole_pairs * omega_me;
        dx[0] = (u_dq.d - pm.r_s * i_sd + pm.l_q * omega_el * i_sq) / pm.l_d;
        dx[1] = (u_dq.q - pm.r_s * i_sq - omega_el * (pm.l_d * i_sd + pm.psi_p)) / pm.l_q;
        dx[2] = (t_motor - load_torque(load, omega_me)) / inertia;
        dx[3] = omega_me;
        break;
    }
    }
    return dx;
}

const std::vector<EntryInfo>& env_entries(MotorKind kind)
{
    using R = EntryRole;
    static const std::vector<EntryInfo> extex{{"omega", R::Speed},   {"torque", R::Torque}, {"i_A", R::Current},
                                              {"i_E", R::Current},   {"u_A", R::Voltage},   {"u_E", R::Voltage},
                                              {"u_sup", R::Supply}};
    static const std::vector<EntryInfo> shunt{{"omega", R::Speed}, {"torque", R::Torque}, {"i_A", R::Current},
                                              {"i_E", R::Current}, {"u", R::Voltage},     {"u_sup", R::Supply}};
    static const std::vector<EntryInfo> single{
        {"omega", R::Speed}, {"torque", R::Torque}, {"i", R::Current}, {"u", R::Voltage}, {"u_sup", R::Supply}};
    static const std::vector<EntryInfo> pmsm{{"omega", R::Speed},   {"torque", R::Torque}, {"i_a", R::Current},
                                             {"i_b", R::Current},   {"i_c", R::Current},   {"u_a", R::Voltage},
                                             {"u_b", R::Voltage},   {"u_c", R::Voltage},   {"u_sup", R::Supply},
                                             {"epsilon", R::Angle}};
    switch (kind) {
    case MotorKind::ExternallyExcited: return extex;
    case MotorKind::Shunt: return shunt;
    case MotorKind::Pmsm: return pmsm;
    default: return single;
    }
}

std::size_t first_voltage_entry(MotorKind kind)
{
    switch (kind) {
    case MotorKind::ExternallyExcited:
    case MotorKind::Shunt: return 4;
    case MotorKind::Pmsm: return 5;
    default: return 3;
    }
}

StateVec channel_currents(const MotorModel& model, const StateVec& state)
{
    switch (model.kind) {
    case MotorKind::ExternallyExcited: return {state[0], state[1]};
    case MotorKind::Shunt: return {state[0] + state[1]};
    case MotorKind::Series:
    case MotorKind::PermanentlyExcited: return {state[0]};
    case MotorKind::Pmsm: {
        const double eps_el = model.pmsm.pole_pairs * state[3];
        const auto ab = park_inverse({state[0], state[1]}, eps_el);
        const auto abc = clarke_inverse(ab);
        return {abc.a, abc.b, abc.c};
    }
    }
    return {};
}

std::vector<double> env_state_vector(const MotorModel& model, const StateVec& state, std::span<const double> u_in,
                                     double u_sup)
{
    require_inputs(model, u_in);
    if (state.size() != model.state_size()) throw ConfigError("motor state has the wrong dimension");
    const double t_motor = torque(model, state);
    switch (model.kind) {
    case MotorKind::ExternallyExcited:
        return {state[2], t_motor, state[0], state[1], u_in[0], u_in[1], u_sup};
    case MotorKind::Shunt: return {state[2], t_motor, state[0], state[1], u_in[0], u_sup};
    case MotorKind::Series:
    case MotorKind::PermanentlyExcited: return {state[1], t_motor, state[0], u_in[0], u_sup};
    case MotorKind::Pmsm: {
        const int p = model.pmsm.pole_pairs;
        const auto i_abc = channel_currents(model, state);
        const double two_pi = 2.0 * std::numbers::pi;
        double eps_el = std::fmod(p * state[3], two_pi);
        if (eps_el < 0.0) eps_el += two_pi;
        return {p * state[2], t_motor, i_abc[0], i_abc[1], i_abc[2], u_in[0], u_in[1], u_in[2], u_sup, eps_el};
    }
    }
    return {};
}

}  // namespace drivegym
