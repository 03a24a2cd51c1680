#pragma once

// The rate functional on discretized paths and its minimization. The cost of
// a path is the integral of
//   L(u, du/dt) = 1/2 (du/dt - b(u))^T a(u)^{-1} (du/dt - b(u)),
// discretized with the midpoint rule; quasipotentials are estimated by
// descending the discretized cost over interior nodes and scanning a grid of
// horizons T.

#include <optional>
#include <vector>

#include "coopstab/flow.hpp"
#include "coopstab/model.hpp"
#include "coopstab/types.hpp"

namespace coopstab {

struct DiscretePath {
    std::vector<double> times;  // strictly increasing, t_0 = 0
    std::vector<Vec> nodes;
    std::optional<double> cached_action;

    int segments() const { return static_cast<int>(times.size()) - 1; }
    double duration() const { return times.back(); }
};

/// Pointwise Lagrangian. Throws std::runtime_error("degenerate diffusion")
/// when a(u) has condition number above 1e12.
double lagrangian(const Model& model, const Vec& u, const Vec& beta);

/// Midpoint-rule discretization of the rate functional.
double path_action(const Model& model, const DiscretePath& path);

/// Gradient of the discretized action with respect to the interior nodes,
/// flattened as (node 1 .. node N-1) x dim.
Vec action_gradient(const Model& model, const DiscretePath& path);

/// Unit-speed straight segment from x to y over T = |y - x| with n_segments
/// pieces. Throws on x = y ("degenerate LIF").
DiscretePath lif_path(const Vec& x, const Vec& y, int n_segments);

/// Grid bound for the straight-segment cost constant on a box: the action of
/// any unit-speed segment inside the box is at most this value times its
/// length. Computed as max over the grid of (1 + |b|)^2 / (2 lambda_min(a)).
double lif_action_constant(const Model& model, const Vec& box_lo, const Vec& box_hi,
                           int per_dim);

/// View a flow trajectory as a discrete path.
DiscretePath path_from_trajectory(const Trajectory& traj);

/// Linear reinterpolation onto a uniform grid with n_segments pieces.
DiscretePath resample_path(const DiscretePath& path, int n_segments);

struct EscapeOptions {
    double step = 1e-2;       // flow sampling step
    double T_max = 500.0;     // flow budget
    double reach_tol = 0.0;   // stop distance to the attractor point; 0 => delta
    double settle_tol = 1e-8;
    double blowup_guard = 1e6;
    /// Stationary arc from y to its unstable endpoint (ordered samples of
    /// equilibria). When present, a slow crawl along the arc is prepended.
    std::optional<std::vector<Vec>> arc;
    double arc_budget = 1e-2;  // action budget for the crawl segment
};

/// Composite low-action path: [arc crawl ->] straight step of length delta
/// off y along v, flow into a neighborhood of the attractor point, straight
/// closing segment. Action is bounded by the straight-segment constants
/// times delta (plus the crawl budget when an arc is supplied).
DiscretePath escape_path(const Model& model, const Vec& y, double delta, const Vec& v,
                         const Vec& attractor_point, const EscapeOptions& opts = {});

struct MinimizeOptions {
    int max_iters = 50000;
    double grad_tol = 1e-6;    // infinity norm
    double armijo_c = 1e-4;
    double backtrack = 0.5;
};

struct OptimizerDiag {
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
    bool line_search_failed = false;
};

struct QuasipotentialEstimate {
    double value = 0.0;
    DiscretePath path;
    double T_used = 0.0;
    OptimizerDiag diag;
};

/// Fixed-horizon inner problem: descend the discretized action over interior
/// nodes with endpoints pinned at x and y. Descent direction is minus the
/// gradient with a Barzilai-Borwein trial step and Armijo backtracking, so
/// every accepted iterate decreases the action. init = nullptr starts from
/// the straight line over [0, T].
QuasipotentialEstimate minimize_action(const Model& model, const Vec& x, const Vec& y,
                                       double T, int n_segments,
                                       const DiscretePath* init = nullptr,
                                       const MinimizeOptions& opts = {});

struct QuasipotentialOptions {
    MinimizeOptions minimize;
    bool try_escape_seed = true;
    double escape_delta = 1e-2;
    double reach_ball = 1e-2;  // target neighborhood treated as "arrived"
    int threads = 1;
    EscapeOptions escape;
};

/// Outer scan over the horizon grid, each seeded with the straight line and,
/// when the flow off x actually reaches y, with the escape construction.
QuasipotentialEstimate quasipotential(const Model& model, const Vec& x, const Vec& y,
                                      const std::vector<double>& T_grid, int n_segments,
                                      const QuasipotentialOptions& opts = {});

/// Membership in the action level set: the path starts at x and its
/// discretized action is at most s.
bool level_set_member(const Model& model, const DiscretePath& path, const Vec& x, double s);

}  // namespace coopstab
