#pragma once

// Euler-Maruyama simulation of dX = b(X) dt + eps sigma(X) dW with a strict
// reproducibility contract: identical (model, x0, eps, step, seed, T) give
// bit-identical trajectories, and ensembles do not depend on scheduling.

#include <cstdint>
#include <functional>
#include <vector>

#include "coopstab/flow.hpp"
#include "coopstab/model.hpp"
#include "coopstab/rng.hpp"
#include "coopstab/types.hpp"

namespace coopstab {

struct SdeRun {
    double eps = 0.0;
    double step = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  // ensemble member index
    Trajectory trajectory;
    bool blown_up = false;
};

/// One Euler-Maruyama step; w carries the Gaussian increments with variance
/// dt per component. Throws BlowupError("numerical blow-up") on a non-finite
/// result.
Vec em_step(const Model& model, const Vec& x, double eps, double dt, const Vec& w);

enum class WalkStatus { Completed, BlownUp };

struct WalkOptions {
    double blowup_guard = 1e6;
};

/// Core stepping loop; on_state(t, x) fires for the initial point and after
/// every step. Returns BlownUp instead of throwing so callers can flag
/// partial results.
WalkStatus sde_walk(const Model& model, const Vec& x0, double eps, double T, double step,
                    std::uint64_t seed, std::uint64_t stream,
                    const std::function<void(double, const Vec&)>& on_state,
                    const WalkOptions& opts = {});

struct SimulateOptions {
    double blowup_guard = 1e6;
    std::uint64_t stream = 0;
};

/// Full-path simulation; throws BlowupError when the guard trips.
SdeRun simulate(const Model& model, const Vec& x0, double eps, double T, double step,
                std::uint64_t seed, const SimulateOptions& opts = {});

struct EnsembleOptions {
    double blowup_guard = 1e6;
    bool store_full_paths = false;  // default keeps endpoints only
    int threads = 1;
};

/// Path i draws from the counter stream (master_seed, i); blow-ups are
/// recorded per path, never fatal.
std::vector<SdeRun> ensemble(const Model& model, const Vec& x0, double eps, double T,
                             double step, int n_paths, std::uint64_t master_seed,
                             const EnsembleOptions& opts = {});

}  // namespace coopstab
