#pragma once

namespace drivegym {

struct AlphaBeta0 {
    double alpha;
    double beta;
    double zero;
};

struct AlphaBeta {
    double alpha;
    double beta;
};

struct DirectQuadrature {
    double d;
    double q;
};

struct PhaseABC {
    double a;
    double b;
    double c;
};

// Amplitude-invariant Clarke transform:
//   alpha = (2a - b - c)/3,  beta = (b - c)/sqrt(3),  zero = sqrt(2)/3 (a + b + c)
AlphaBeta0 clarke_forward(const PhaseABC& abc);
PhaseABC clarke_inverse(const AlphaBeta& ab);

// Park rotation into the rotor frame at electrical angle eps.
DirectQuadrature park_forward(const AlphaBeta& ab, double eps);
AlphaBeta park_inverse(const DirectQuadrature& dq, double eps);

}  // namespace drivegym
