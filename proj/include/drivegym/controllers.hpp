#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "drivegym/env.hpp"

namespace drivegym {

/// Proportional gain and integral gain (kp / Tn), physical units.
struct PiGains {
    double kp{0.0};
    double ki{0.0};
};

/// Cascade tuning. The current loop uses the magnitude optimum on the
/// armature circuit, the speed loop the symmetric optimum (a = 2) on the
/// mechanical integrator with the closed current loop approximated by a lag of
/// 2 * t_sigma. t_sigma = 1.5 tau lumps the one-step computation delay and the
/// zero-order hold.
struct CascadeTuning {
    PiGains current;      // V per A
    PiGains speed;        // A per rad/s
    PiGains excitation;   // externally excited motor only
    double l_circuit{0.0};
    double r_circuit{0.0};
    double torque_constant{0.0};  // N*m per A at nominal excitation
    double t_sigma{0.0};
};

/// Throws ConfigError for the PMSM or degenerate time constants.
CascadeTuning tune_pi(const MotorModel& motor, const LoadParams& load, double tau,
                      std::span<const double> nominal_values);

/// Per-episode state of the cascade. Scales are xi * x_N of the respective
/// entry, so normalized value * scale gives physical units.
struct PiCascadeState {
    CascadeTuning tuning;
    double omega_scale{1.0};
    double current_scale{1.0};
    double u_sup{1.0};
    double duty_low{0.0};
    double duty_high{1.0};
    bool bipolar_current{true};
    double speed_integral{0.0};    // A
    double current_integral{0.0};  // V
    double current_reference{0.0}; // normalized, last set-point

    void reset_integrators();
};

/// Conditional-integration PI step. The integrator is frozen while the output
/// is saturated and the error drives it further into saturation.
double pi_step(const PiGains& gains, double& integral, double error, double feedforward, double low, double high,
               double tau);

/// Speed error -> current set-point (clamped to +-i_limit_norm, or
/// [0, i_limit_norm] for unipolar currents) -> duty cycle. emf is the
/// back-EMF feedforward in volts.
double pi_act(PiCascadeState& state, double omega_norm, double omega_ref_norm, double i_norm, double i_limit_norm,
              double tau, double emf = 0.0);

/// Inner loop only: current reference -> duty cycle.
double pi_current_act(PiCascadeState& state, double i_norm, double i_ref_norm, double tau, double emf = 0.0);

struct HysteresisState {
    double band{0.05};
    int on_command{1};
    int off_command{0};
    int last_command{0};
};

int hysteresis_act(HysteresisState& state, double tracked_norm, double ref_norm);

class Controller {
public:
    virtual ~Controller() = default;
    /// Called after every Environment::reset(); binds to the layout and
    /// clears internal state.
    virtual void reset(const Environment& env) = 0;
    virtual Action act(std::span<const double> observation) = 0;
    [[nodiscard]] virtual std::string_view name() const = 0;
};

struct ControllerOptions {
    std::optional<double> band;
    std::optional<double> speed_kp;
    std::optional<double> speed_ki;
    std::optional<double> current_kp;
    std::optional<double> current_ki;
};

/// Speed cascade when omega carries a reference, otherwise a current loop on
/// the tracked current. Continuous action spaces of DC motors only.
class PiCascadeController final : public Controller {
public:
    explicit PiCascadeController(ControllerOptions options = {}) : options_(options) {}
    void reset(const Environment& env) override;
    Action act(std::span<const double> observation) override;
    [[nodiscard]] std::string_view name() const override { return "pi"; }
    [[nodiscard]] const PiCascadeState& state() const { return state_; }

private:
    ControllerOptions options_;
    PiCascadeState state_;
    PiCascadeState excitation_;
    MotorModel motor_;
    std::vector<double> scale_;
    double tau_{1e-4};
    double i_limit_norm_{1.0};
    double i_e_ref_norm_{0.0};
    std::size_t ref_index_{0};
    bool speed_mode_{true};
    std::size_t current_entry_{2};
};

/// On/off control of the first tracked entry. Discrete DC action spaces.
class HysteresisController final : public Controller {
public:
    explicit HysteresisController(ControllerOptions options = {}) : options_(options) {}
    void reset(const Environment& env) override;
    Action act(std::span<const double> observation) override;
    [[nodiscard]] std::string_view name() const override { return "hysteresis"; }

private:
    ControllerOptions options_;
    HysteresisState state_;
    std::size_t entry_{0};
    std::size_t ref_index_{0};
};

/// Replays the duty sequence stored with a random-fourier reference. With
/// zero noise this reproduces the reference exactly.
class OracleController final : public Controller {
public:
    void reset(const Environment& env) override;
    Action act(std::span<const double> observation) override;
    [[nodiscard]] std::string_view name() const override { return "oracle"; }

private:
    std::vector<StateVec> duties_;
    std::size_t t_{0};
};

/// Always the zero action.
class ZeroController final : public Controller {
public:
    void reset(const Environment& env) override;
    Action act(std::span<const double> observation) override;
    [[nodiscard]] std::string_view name() const override { return "zero"; }

private:
    Action zero_{0};
};

/// Line protocol to an agent in another process. Per step one JSON object
/// {"observation": [...]} is written and one line {"action": 3} or
/// {"action": [0.2]} is read back.
class ExternalController final : public Controller {
public:
    ExternalController(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
    void reset(const Environment& env) override;
    Action act(std::span<const double> observation) override;
    [[nodiscard]] std::string_view name() const override { return "external"; }

private:
    std::istream& in_;
    std::ostream& out_;
    ActionMode mode_{ActionMode::Continuous};
    std::size_t channels_{1};
};

/// "pi", "hysteresis", "oracle" or "zero". Throws ConfigError otherwise.
std::unique_ptr<Controller> make_controller(std::string_view name, const ControllerOptions& options = {});

}  // namespace drivegym
