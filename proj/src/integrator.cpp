#include "drivegym/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drivegym/errors.hpp"

namespace drivegym {

namespace {

StateVec checked(const Rhs& rhs, const StateVec& x)
{
    StateVec k = rhs(x);
    if (!k.all_finite()) throw NumericalError("right-hand side returned a non-finite derivative");
    return k;
}

StateVec euler(const Rhs& rhs, const StateVec& x, double h) { return axpy(x, h, checked(rhs, x)); }

StateVec rk4(const Rhs& rhs, const StateVec& x, double h)
{
    const StateVec k1 = checked(rhs, x);
    const StateVec k2 = checked(rhs, axpy(x, 0.5 * h, k1));
    const StateVec k3 = checked(rhs, axpy(x, 0.5 * h, k2));
    const StateVec k4 = checked(rhs, axpy(x, h, k3));
    StateVec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return y;
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
// b - b_hat
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

StateVec dopri5(const IntegratorChoice& c, const Rhs& rhs, const StateVec& x0)
{
    const std::size_t n = x0.size();
    const double h_min = c.tau * 1e-12;
    double t = 0.0;
    double h = c.tau;
    StateVec x = x0;
    StateVec k1 = checked(rhs, x);

    while (t < c.tau) {
        const bool last = t + h >= c.tau;
        if (last) h = c.tau - t;

        StateVec tmp(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * a21 * k1[i];
        const StateVec k2 = checked(rhs, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * (a31 * k1[i] + a32 * k2[i]);
        const StateVec k3 = checked(rhs, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        const StateVec k4 = checked(rhs, tmp);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = x[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        const StateVec k5 = checked(rhs, tmp);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = x[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const StateVec k6 = checked(rhs, tmp);
        StateVec y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = x[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        const StateVec k7 = checked(rhs, y);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = c.atol + c.rtol * std::max(std::abs(x[i]), std::abs(y[i]));
            err = std::max(err, std::abs(e) / sc);
        }

        if (err <= 1.0) {
            t = last ? c.tau : t + h;
            x = y;
            k1 = k7;
        }
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= factor;
        if (t < c.tau && h < h_min) {
            throw NumericalError("adaptive step size fell below " + std::to_string(h_min) + " s at t = " +
                                 std::to_string(t) + " s (error norm " + std::to_string(err) + ")");
        }
    }
    return x;
}

}  // namespace

std::string_view integrator_name(IntegratorMethod m)
{
    switch (m) {
    case IntegratorMethod::Euler: return "euler";
    case IntegratorMethod::Rk4: return "rk4";
    case IntegratorMethod::DormandPrince: return "dopri5";
    }
    return "?";
}

IntegratorMethod integrator_from_name(std::string_view name)
{
    for (auto m : {IntegratorMethod::Euler, IntegratorMethod::Rk4, IntegratorMethod::DormandPrince}) {
        if (integrator_name(m) == name) return m;
    }
    throw ConfigError("unknown integrator '" + std::string(name) + "'");
}

void IntegratorChoice::validate() const
{
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("sampling time tau must be positive");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("integrator tolerances must be positive");
}

StateVec step_ode(const IntegratorChoice& choice, const Rhs& rhs, const StateVec& state)
{
    if (!state.all_finite()) throw NumericalError("non-finite state passed to the integrator");
    StateVec next;
    switch (choice.method) {
    case IntegratorMethod::Euler: next = euler(rhs, state, choice.tau); break;
    case IntegratorMethod::Rk4: next = rk4(rhs, state, choice.tau); break;
    case IntegratorMethod::DormandPrince: next = dopri5(choice, rhs, state); break;
    }
    if (!next.all_finite()) throw NumericalError("integration produced a non-finite state");
    return next;
}

}  // namespace drivegym
