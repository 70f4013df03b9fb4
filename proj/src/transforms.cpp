#include "drivegym/transforms.hpp"

#include <cmath>
#include <numbers>

namespace drivegym {

namespace {
constexpr double kInvSqrt3 = 1.0 / std::numbers::sqrt3;
}

AlphaBeta0 clarke_forward(const PhaseABC& abc)
{
    return {
        (2.0 * abc.a - abc.b - abc.c) / 3.0,
        (abc.b - abc.c) * kInvSqrt3,
        std::numbers::sqrt2 / 3.0 * (abc.a + abc.b + abc.c),
    };
}

PhaseABC clarke_inverse(const AlphaBeta& ab)
{
    const double half_sqrt3_beta = 0.5 * std::numbers::sqrt3 * ab.beta;
    return {ab.alpha, -0.5 * ab.alpha + half_sqrt3_beta, -0.5 * ab.alpha - half_sqrt3_beta};
}

DirectQuadrature park_forward(const AlphaBeta& ab, double eps)
{
    const double c = std::cos(eps);
    const double s = std::sin(eps);
    return {c * ab.alpha + s * ab.beta, -s * ab.alpha + c * ab.beta};
}

AlphaBeta park_inverse(const DirectQuadrature& dq, double eps)
{
    const double c = std::cos(eps);
    const double s = std::sin(eps);
    return {c * dq.d - s * dq.q, s * dq.d + c * dq.q};
}

}  // namespace drivegym
