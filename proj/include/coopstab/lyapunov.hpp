#pragma once

// Quadratic Lyapunov machinery: solve A^T B + B A = -I for a Hurwitz A and
// expose V(x) = x^T B x with its gradient and Hessian.

#include "coopstab/types.hpp"

namespace coopstab {

struct LyapunovQuadratic {
    Mat B;
    double residual_inf = 0.0;  // || A^T B + B A + I ||_inf at construction

    double value(const Vec& x) const { return x.dot(B * x); }
    Vec gradient(const Vec& x) const { return 2.0 * (B * x); }
    Mat hessian() const { return 2.0 * B; }
    double min_eigenvalue() const;
};

/// Solves the Lyapunov equation by vectorizing the r(r+1)/2 symmetric
/// unknowns, then symmetrizes. Throws std::invalid_argument("unstable
/// matrix") when A is not Hurwitz and std::runtime_error on a singular
/// system.
LyapunovQuadratic solve_lyapunov(const Mat& A);

}  // namespace coopstab
