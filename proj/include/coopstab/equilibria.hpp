#pragma once

// Equilibrium location and stability classification. For the Griffith model
// the equilibria lie on a single ray and reduce to the scalar problem
// hill_ratio(z) = rate product, whose slope sign decides stability; generic
// models go through damped Newton plus Jacobian spectra.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "coopstab/model.hpp"
#include "coopstab/types.hpp"

namespace coopstab {

enum class Stability { AsymptoticallyStable, Unstable, Marginal };

std::string to_string(Stability s);

struct EquilibriumRecord {
    Vec point;
    std::vector<std::complex<double>> eigenvalues;
    Stability classification = Stability::Marginal;
    std::optional<double> griffith_root;  // scalar z with point = z * ray
    std::optional<double> ratio_slope;    // hill_ratio_deriv at that z
    std::string note;                     // marginal/disagreement annotations

    double max_real_eigenvalue() const;
};

/// Product of the decay rates; the level the Hill ratio must hit at a
/// nonzero equilibrium.
double decay_rate_product(const GriffithParams& p);

/// hill_response(m, z) / z for z > 0.
double hill_ratio(double m, double z);

/// d/dz of the Hill ratio, (z f'(z) - f(z)) / z^2 for z > 0.
double hill_ratio_deriv(double m, double z);

/// Argmax of the Hill ratio on z > 0 for m > 1: (m - 1)^{1/m}.
double hill_ratio_peak_arg(double m);

/// Peak value of the Hill ratio for m > 1.
double hill_ratio_peak(double m);

/// Positive solutions of hill_ratio(z) = phi. m = 1 has at most one; m > 1
/// has zero, one (tangency) or two, bracketed on either side of the peak and
/// polished to machine precision.
std::vector<double> hill_ratio_roots(double m, double phi);

/// One column of the zero-noise classification table: which equilibria can
/// carry limit mass for given (m, phi).
struct SupportPrediction {
    std::string regime;          // "origin" | "symmetric-pair" | "origin-and-symmetric-pair"
    bool origin = false;
    std::vector<double> ray_roots;  // positive z values; each contributes +-z * ray
    bool marginal = false;          // phi sits on a classification boundary

    std::vector<Vec> support_points(const GriffithParams& p) const;
};

SupportPrediction predict_zero_noise_support(double m, double phi);

struct GriffithSpectrumSummary {
    double phi = 0.0;
    double m = 1.0;
    std::optional<double> phi_m;  // peak value, m > 1 only
    std::vector<double> roots;
    SupportPrediction predicted;
};

struct GriffithClassification {
    std::vector<EquilibriumRecord> records;
    GriffithSpectrumSummary summary;

    std::vector<Vec> stable_set() const;
    std::vector<Vec> unstable_set() const;
};

/// Emits the origin plus +-z * ray for each positive root; stability is
/// assigned by BOTH the ratio-slope test and the Jacobian spectrum, with any
/// disagreement recorded in the note field.
GriffithClassification classify_griffith(const GriffithParams& p);

struct NewtonOptions {
    int max_iters = 100;
    double tol = 1e-12;       // |b|_inf convergence target
    double dedup_tol = 1e-8;
    double eig_threshold = 1e-8;
};

struct NewtonResult {
    std::vector<EquilibriumRecord> records;
    std::vector<Vec> failed_seeds;  // divergence or singular Jacobian
};

NewtonResult newton_equilibria(const Model& model, const std::vector<Vec>& seeds,
                               const NewtonOptions& opts = {});

struct EquilibriumArc {
    std::vector<EquilibriumRecord> chain;  // strongly ordered, gaps < tol
    bool degenerate() const { return chain.size() == 1; }
};

/// Groups equilibria into maximal strongly ordered chains with consecutive
/// gaps below tol; isolated equilibria come back as degenerate arcs.
std::vector<EquilibriumArc> detect_stationary_arc(const std::vector<EquilibriumRecord>& records,
                                                  double tol);

std::vector<std::complex<double>> jacobian_eigenvalues(const Model& model, const Vec& p);

Stability classify_spectrum(const std::vector<std::complex<double>>& eigs,
                            double threshold = 1e-8);

}  // namespace coopstab
