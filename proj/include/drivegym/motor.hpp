#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drivegym/state_vec.hpp"

namespace drivegym {

enum class MotorKind { ExternallyExcited, Shunt, Series, PermanentlyExcited, Pmsm };

/// Short identifier used in environment ids and config files
/// ("extex", "shunt", "series", "permex", "pmsm").
std::string_view motor_name(MotorKind kind);
MotorKind motor_from_name(std::string_view name);
[[nodiscard]] inline bool is_dc(MotorKind kind) { return kind != MotorKind::Pmsm; }

/// DC machine constants. Units: ohm, henry, volt-second, kg m^2.
/// psi_e_prime is only used by the permanently excited motor; the other DC
/// variants derive their flux from l_e_prime * i_E.
struct DcMotorParams {
    double r_a{2.78};
    double r_e{1.0};
    double l_a{6.3e-3};
    double l_e{1.6e-3};
    double l_e_prime{0.5e-3};
    double psi_e_prime{0.0};
    double j_rotor{0.017};
};

struct PmsmParams {
    double r_s{18e-3};
    double l_d{0.37e-3};
    double l_q{1.2e-3};
    int pole_pairs{3};
    double psi_p{66e-3};
    double j_rotor{0.3883};
};

/// Load torque T_L = sign(w) * (c w^2 + sign(w) b w + a).
struct LoadParams {
    double a{0.01};
    double b{0.12};
    double c{0.1};
    double j_load{1.0};
};

struct MotorModel {
    MotorKind kind{MotorKind::Series};
    DcMotorParams dc{};
    PmsmParams pmsm{};

    /// Throws ConfigError when a parameter violates its positivity constraint.
    void validate() const;
    [[nodiscard]] std::size_t state_size() const;
    /// Number of input voltages: 2 for ExtEx, 3 phase voltages for the
    /// PMSM, 1 otherwise.
    [[nodiscard]] std::size_t input_size() const;
    [[nodiscard]] double rotor_inertia() const { return kind == MotorKind::Pmsm ? pmsm.j_rotor : dc.j_rotor; }
};

/// Parameter set shipped as default for each motor kind. The series motor
/// uses the reference example machine (R_A 2.78, R_E 1.0, L_A 6.3 mH,
/// L_E 1.6 mH, L'_E 0.5 mH, J 0.017).
MotorModel default_motor(MotorKind kind);

// Internal ODE state layouts.
//   ExtEx, Shunt: (i_A, i_E, omega)
//   Series, PermEx: (i, omega)
//   PMSM: (i_sd, i_sq, omega_me, eps_me)
namespace state_index {
inline constexpr std::size_t kArmature = 0;
inline constexpr std::size_t kExcitation = 1;
inline constexpr std::size_t kDcOmegaTwoCircuit = 2;
inline constexpr std::size_t kDcOmegaOneCircuit = 1;
inline constexpr std::size_t kIsd = 0;
inline constexpr std::size_t kIsq = 1;
inline constexpr std::size_t kOmegaMe = 2;
inline constexpr std::size_t kEpsMe = 3;
}  // namespace state_index

/// Mechanical angular velocity of a motor state.
double mechanical_speed(const MotorModel& model, const StateVec& state);

double load_torque(const LoadParams& load, double omega_me);

double torque(const MotorModel& model, const StateVec& state);

/// Time derivative of the motor state for the given input voltages. PMSM
/// inputs are phase voltages (a, b, c) and are transformed to d/q with the
/// electrical angle p * eps_me. Inertia is J_rotor + J_load.
StateVec motor_derivative(const MotorModel& model, const StateVec& state, std::span<const double> u_in,
                          const LoadParams& load);

/// Physical meaning of an environment-state entry. Drives normalization
/// ranges, limit exemptions and noise routing.
enum class EntryRole { Speed, Torque, Current, Voltage, Supply, Angle };

struct EntryInfo {
    std::string name;
    EntryRole role;
};

/// Ordered entries of the environment state vector:
///   ExtEx  [omega, torque, i_A, i_E, u_A, u_E, u_sup]
///   Shunt  [omega, torque, i_A, i_E, u, u_sup]
///   Series [omega, torque, i, u, u_sup]
///   PermEx [omega, torque, i, u, u_sup]
///   PMSM   [omega, torque, i_a, i_b, i_c, u_a, u_b, u_c, u_sup, epsilon]
const std::vector<EntryInfo>& env_entries(MotorKind kind);

/// Index of the first input-voltage entry; the remaining input_size() - 1
/// voltages follow contiguously.
std::size_t first_voltage_entry(MotorKind kind);

/// Per input channel, the current whose sign drives the converter's
/// interlocking error (armature/excitation, shunt total, phase currents).
StateVec channel_currents(const MotorModel& model, const StateVec& state);

/// Assembles the environment state vector. For the PMSM the d/q currents are
/// mapped back to phase currents; omega and epsilon are electrical.
std::vector<double> env_state_vector(const MotorModel& model, const StateVec& state, std::span<const double> u_in,
                                     double u_sup);

}  // namespace drivegym
