#pragma once

// Grid-based structural checks: cooperativity and irreducibility of the
// Jacobian, and the two Lyapunov-type dissipation inequalities used to pin
// down stationary measures and the large-deviation regime. All checks are
// heuristics over finite grids, never proofs; reports say PASS-on-grid.

#include <map>
#include <string>
#include <vector>

#include "coopstab/lyapunov.hpp"
#include "coopstab/model.hpp"
#include "coopstab/types.hpp"

namespace coopstab {

struct HypothesisReport {
    std::string which;
    std::string grid_desc;
    bool pass = false;
    /// Worst-case slack of the tested inequality over the grid; the pass
    /// rule per check is documented on the operation.
    double margin = 0.0;
    std::vector<Vec> failing_points;
    std::map<std::string, double> params;
};

/// Uniform grid over the box [lo, hi], per_dim points per axis.
std::vector<Vec> box_grid(const Vec& lo, const Vec& hi, int per_dim);

/// Points of the box grid over [-r_max, r_max]^dim with r_min <= |x| <= r_max.
std::vector<Vec> annulus_grid(int dim, double r_min, double r_max, int per_dim);

/// PASS iff every off-diagonal Jacobian entry >= -tol on the grid;
/// margin = min off-diagonal entry (vacuous PASS for r = 1).
HypothesisReport check_cooperative(const Model& model, const std::vector<Vec>& grid,
                                   double tol = 1e-12);

/// Tests strong connectivity of the support graph of |Db(x)| > tol at each
/// grid point; failing points are reported. margin = -(#failing points).
HypothesisReport check_irreducible(const Model& model, const std::vector<Vec>& grid,
                                   double tol = 1e-12);

/// Dissipation inequality: <b, grad V> + (eps^2/2) Tr(sigma^T D2V sigma)
/// <= -gamma for eps in {0, eps0} and every grid point with |x| >= R.
HypothesisReport verify_h2(const Model& model, const LyapunovQuadratic& V, double gamma,
                           double eps0, double R, const std::vector<Vec>& grid);

/// Growth/trace inequalities:
///   <b, grad V> + (theta/2) Tr(sigma^T D2V sigma) + |sigma^T grad V|^2 / (eta V)
///     <= C (1 + V)
///   Tr(sigma^T D2V sigma) >= -M - C V
/// on the grid, excluding a ball of radius `origin_exclusion` around 0 where
/// the quotient degenerates. margin = min slack across both inequalities.
HypothesisReport verify_h3(const Model& model, const LyapunovQuadratic& V, double theta,
                           double eta, double C, double M, const std::vector<Vec>& grid,
                           double origin_exclusion = 1e-3);

struct H3Constants {
    double theta = 0.0;
    double eta = 0.0;
    double C = 0.0;
    double M = 0.0;
};

/// Constants that make the first H3 inequality hold for a diffusion bounded
/// by sigma_j^2 <= c (z^2+1): theta and eta chosen so the quadratic
/// coefficient is negative, then C = M = max of the left-hand side over the
/// grid plus slack.
H3Constants h3_constants_recipe(const Model& model, const LyapunovQuadratic& V,
                                double c_growth, const std::vector<Vec>& grid);

/// Finite-difference continuity probe: largest local difference quotient of
/// the drift and diffusion over the grid. A heuristic stand-in for local
/// Lipschitz continuity.
double local_lipschitz_estimate(const Model& model, const std::vector<Vec>& grid,
                                double h = 1e-4);

}  // namespace coopstab
