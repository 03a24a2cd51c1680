#pragma once

// Drift/diffusion model abstraction and the Griffith positive-feedback
// instance. The stochastic system is dX = b(X) dt + eps * sigma(X) dW with
// sigma non-degenerate (a(x) = sigma sigma^T positive definite).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopstab/types.hpp"

namespace coopstab {

/// Odd Hill response sgn(z) |z|^m / (1 + |z|^m), m >= 1.
double hill_response(double m, double z);

/// Derivative m |z|^{m-1} / (1 + |z|^m)^2. The z = 0 value is the analytic
/// limit: 1 for m = 1, 0 for m > 1.
double hill_response_deriv(double m, double z);

/// Per-coordinate diffusion sigma_j. "Const": sigma_j^2 = c. "LinearGrowth":
/// sigma_j^2(z) = c (z^2 + 1). Both satisfy 0 < sigma_j^2(z) <= c (z^2 + 1).
struct DiffusionSpec {
    enum class Kind { Const, LinearGrowth };
    Kind kind = Kind::Const;
    double c = 1.0;

    double value(double z) const;
    double deriv(double z) const;
    /// The quadratic-growth envelope constant (the stored c).
    double growth_bound() const { return c; }
    bool constant() const { return kind == Kind::Const; }
};

struct GriffithParams {
    std::vector<double> alphas;  // decay rates, all > 0
    double m = 1.0;              // Hill exponent, >= 1
    DiffusionSpec sigma;

    int dim() const { return static_cast<int>(alphas.size()); }
    void validate() const;  // throws std::invalid_argument
};

/// Drift of the positive feedback circuit:
/// b_1 = f(x_r) - alpha_1 x_1, b_j = x_{j-1} - alpha_j x_j for j >= 2.
Vec griffith_drift(const GriffithParams& p, const Vec& x);

/// Lower-bidiagonal Jacobian with -alpha_j on the diagonal, ones below it and
/// f'(x_r) in the top-right corner.
Mat griffith_jacobian(const GriffithParams& p, const Vec& x);

/// Direction of the equilibrium ray: every equilibrium is z * ray for a
/// scalar z. Components (prod_{i=2..r} alpha_i, ..., alpha_r, 1).
Vec griffith_ray(const GriffithParams& p);

struct Model {
    int dim = 0;
    std::string name;
    std::function<Vec(const Vec&)> drift;
    std::function<Mat(const Vec&)> jacobian;
    std::function<Mat(const Vec&)> sigma;
    /// d sigma / d x_k; leave empty to fall back to central differences where
    /// a derivative of the noise matrix is required.
    std::function<Mat(const Vec&, int)> sigma_partial;
    bool sigma_constant = false;
    std::optional<GriffithParams> griffith;

    /// a(x) = sigma(x) sigma(x)^T.
    Mat noise_covariance(const Vec& x) const;
};

Model griffith_model(GriffithParams p);

/// 1-D (or diagonal r-D) Ornstein-Uhlenbeck test model: b(x) = -lambda x,
/// sigma = I. lambda < 0 is allowed and gives an explosive drift.
Model ou_model(double lambda, int dim = 1);

/// Parse {"type":"griffith","alphas":[...],"m":...,"sigma":{...}} or
/// {"type":"ou","lambda":...,"dim":...}. Unknown keys are rejected.
Model model_from_json(const nlohmann::json& spec);

/// Hopf bifurcation constants of the 5-dimensional equal-rate circuit:
/// eta = (m cos^5(2 pi / 5) - 1)^{1/m}, beta = (eta^{m-1} / (1+eta^m))^{1/5}.
struct HopfPoint {
    double eta = 0.0;
    double beta = 0.0;
};

/// Smallest exponent admitting a Hopf point, 1 / cos^5(2 pi / 5).
double hopf_threshold();

/// Throws std::domain_error("no Hopf point") for m below the threshold.
HopfPoint hopf_constants(double m, int r = 5);

}  // namespace coopstab
