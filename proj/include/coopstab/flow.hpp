#pragma once

// Deterministic flow of dx/dt = b(x): fixed-step RK4 integration, omega-limit
// probing, order-preservation spot checks and the dual-attractor probe used
// by the low-action escape constructions.

#include <cstdint>
#include <optional>
#include <vector>

#include "coopstab/model.hpp"
#include "coopstab/types.hpp"

namespace coopstab {

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;

    const Vec& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }
    std::size_t size() const { return times.size(); }
};

struct FlowOptions {
    double blowup_guard = 1e6;  // abort when |x|_inf exceeds this
};

Vec rk4_step(const Model& model, const Vec& x, double h);

/// Classical fixed-step RK4 over [0, T]; the last step is shortened to land
/// exactly on T. Throws BlowupError("non-dissipative escape") on guard hit.
Trajectory integrate(const Model& model, const Vec& x0, double T, double step,
                     const FlowOptions& opts = {});

struct AttractorProbe {
    Vec seed;
    Vec point;            // settled point (best iterate when not converged)
    double time = 0.0;    // integration time spent
    double residual = 0.0;  // |b(point)|_inf
    bool converged = false;
};

struct ProbeOptions {
    double step = 1e-2;
    double settle_tol = 1e-8;
    int settle_streak = 10;  // consecutive small-|b| steps required
    double blowup_guard = 1e6;
};

/// Integrates until |b(x)| stays below settle_tol for settle_streak steps or
/// the budget T_max runs out.
AttractorProbe omega_limit_probe(const Model& model, const Vec& x0, double T_max,
                                 double settle_tol, const ProbeOptions& opts = {});

struct MonotonicityReport {
    int pairs = 0;
    int weak_violations = 0;    // order lost at time T
    int strong_violations = 0;  // x < y but not strongly ordered at T
    std::vector<std::pair<Vec, Vec>> failures;
    bool pass = false;
};

struct MonotonicityOptions {
    Vec box_lo;       // sampling box (defaults to [-2, 2]^r)
    Vec box_hi;
    double step = 1e-3;
    double tol = 1e-7;
    int threads = 1;
};

/// Samples n_pairs ordered pairs x <= y, integrates both to time T and
/// checks order preservation; strictly ordered pairs must come out strongly
/// ordered for T >= 1.
MonotonicityReport check_monotonicity(const Model& model, int n_pairs, double T,
                                      std::uint64_t seed,
                                      const MonotonicityOptions& opts = {});

struct DualAttractorOptions {
    double T_max = 500.0;
    ProbeOptions probe;
};

/// Probes the attractor strictly above (delta > 0 along v >> 0) or below
/// (flip the sign of v) the supremum of an unordered invariant set or an
/// unstable arc endpoint. delta = 0 degenerates to omega_limit_probe.
AttractorProbe dual_attractor(const Model& model, const Vec& k_sup, double delta,
                              const Vec& v, const DualAttractorOptions& opts = {});

/// Unit eigenvector for the largest-real-part eigenvalue of Db(p) when that
/// eigenvalue is real and positive, oriented to have nonnegative sum. Used
/// as the escape direction approximation at unstable equilibria.
std::optional<Vec> unstable_direction(const Model& model, const Vec& p);

}  // namespace coopstab
