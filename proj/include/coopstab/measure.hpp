#pragma once

// Empirical stationary measures by long-run occupation, zero-noise
// concentration sweeps, and the classification-table comparison for the
// positive feedback circuit.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopstab/equilibria.hpp"
#include "coopstab/model.hpp"
#include "coopstab/types.hpp"

namespace coopstab {

struct HistogramGrid {
    Vec lo;
    Vec hi;
    std::vector<int> bins;

    int dim() const { return static_cast<int>(bins.size()); }
    long cells() const;
    /// Flat cell index, or nullopt when x lies outside the window.
    std::optional<long> locate(const Vec& x) const;
    Vec center(long flat) const;
    void validate() const;
};

struct StationaryEstimate {
    double eps = 0.0;
    HistogramGrid grid;
    std::vector<double> weights;    // normalized over in-window samples
    double outside_fraction = 0.0;  // post-burn-in samples outside the window
    std::vector<double> ball_masses;  // one per supplied center
    double burn_in = 0.0;
    long total_samples = 0;  // post-burn-in
    bool valid = true;
    std::string flag;  // e.g. "blow-up" when invalid

    double second_moment() const;  // sum of weights * |center|^2
};

struct StationaryOptions {
    double burn_in = 0.2;
    double ball_radius = 0.2;
    /// Measure ball distances with components divided by the equilibrium-ray
    /// direction (Griffith models only; falls back to Euclidean).
    bool ray_scaled_metric = true;
    double blowup_guard = 1e6;
};

/// Occupation measure of one long Euler-Maruyama path after discarding the
/// burn-in prefix. Ball masses are accumulated per supplied center. A
/// blow-up flags the (partial) estimate invalid instead of throwing.
StationaryEstimate estimate_stationary(const Model& model, const Vec& x0, double eps,
                                       double T_total, double step, std::uint64_t seed,
                                       const HistogramGrid& grid,
                                       const std::vector<Vec>& centers,
                                       const StationaryOptions& opts = {});

struct ConcentrationRow {
    double eps = 0.0;
    double stable_mass = 0.0;
    double unstable_mass = 0.0;
    double leftover = 0.0;
    double T_total = 0.0;
    bool valid = true;
};

struct ConcentrationReport {
    std::vector<ConcentrationRow> rows;  // one per eps, in the given order
    bool monotone = false;  // stable mass non-decreasing as eps decreases
    std::optional<SupportPrediction> predicted;
    bool agrees_with_classification = false;
    std::vector<StationaryEstimate> estimates;
};

struct SweepOptions {
    StationaryOptions stationary;
    double step = 1e-3;
    /// T_total(eps) = clamp(t_scale / eps^2, t_min, t_cap); metastable
    /// transition times grow exponentially so the budget is capped.
    double t_scale = 0.5;
    double t_min = 50.0;
    double t_cap = 2000.0;
    double monotone_slack = 0.05;  // Monte-Carlo slack on the mass ordering
    int threads = 1;
    Vec x0;             // defaults to the equilibrium ray point (Griffith)
    HistogramGrid grid;  // empty bins => an automatic window
    std::vector<Vec> stable_centers;    // default: classification of the model
    std::vector<Vec> unstable_centers;
};

/// Runs estimate_stationary for each eps (decreasing), checks that the
/// stable-set mass does not decrease along the sweep, and compares the
/// terminal support with the predicted one for Griffith models.
ConcentrationReport concentration_sweep(const Model& model, const std::vector<double>& eps_list,
                                        std::uint64_t seed, const SweepOptions& opts = {});

/// The zero-noise limit support for given (m, phi): the classification-table
/// column. Same content as predict_zero_noise_support.
SupportPrediction table1_predict(double m, double phi);

}  // namespace coopstab
