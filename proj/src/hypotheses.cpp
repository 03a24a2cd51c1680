#include "coopstab/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace coopstab {

namespace {

std::string describe_grid(std::size_t n, int dim) {
    std::ostringstream os;
    os << n << " points in R^" << dim;
    return os.str();
}

/// Strong connectivity of the digraph with edge i -> j iff |a(i,j)| > tol,
/// i != j. Reachability by repeated expansion; r is tiny.
bool strongly_connected(const Mat& a, double tol) {
    const int n = static_cast<int>(a.rows());
    if (n == 1) return true;
    auto reachable_from = [&](int start, bool transpose) {
        std::vector<bool> seen(n, false);
        std::vector<int> stack{start};
        seen[start] = true;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                if (v == u || seen[v]) continue;
                const double w = transpose ? a(v, u) : a(u, v);
                if (std::abs(w) > tol) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return seen;
    };
    const auto fwd = reachable_from(0, false);
    const auto bwd = reachable_from(0, true);
    for (int v = 0; v < n; ++v)
        if (!fwd[v] || !bwd[v]) return false;
    return true;
}

}  // namespace

std::vector<Vec> box_grid(const Vec& lo, const Vec& hi, int per_dim) {
    const int dim = static_cast<int>(lo.size());
    if (hi.size() != dim) throw std::invalid_argument("box_grid: dimension mismatch");
    if (per_dim < 1) throw std::invalid_argument("box_grid: per_dim must be >= 1");
    std::vector<Vec> pts;
    std::vector<int> idx(dim, 0);
    const long total = static_cast<long>(std::pow(per_dim, dim));
    pts.reserve(total);
    for (long flat = 0; flat < total; ++flat) {
        Vec p(dim);
        long rem = flat;
        for (int d = 0; d < dim; ++d) {
            const int k = static_cast<int>(rem % per_dim);
            rem /= per_dim;
            p[d] = per_dim == 1 ? lo[d] : lo[d] + (hi[d] - lo[d]) * k / (per_dim - 1);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

std::vector<Vec> annulus_grid(int dim, double r_min, double r_max, int per_dim) {
    const Vec lo = Vec::Constant(dim, -r_max);
    const Vec hi = Vec::Constant(dim, r_max);
    std::vector<Vec> pts;
    for (auto& p : box_grid(lo, hi, per_dim)) {
        const double n = p.norm();
        if (n >= r_min && n <= r_max) pts.push_back(std::move(p));
    }
    return pts;
}

HypothesisReport check_cooperative(const Model& model, const std::vector<Vec>& grid,
                                   double tol) {
    HypothesisReport rep;
    rep.which = "H1-cooperative";
    rep.grid_desc = describe_grid(grid.size(), model.dim);
    rep.params["tol"] = tol;
    double margin = std::numeric_limits<double>::infinity();
    for (const Vec& x : grid) {
        const Mat j = model.jacobian(x);
        for (int a = 0; a < model.dim; ++a)
            for (int b = 0; b < model.dim; ++b) {
                if (a == b) continue;
                if (j(a, b) < margin) margin = j(a, b);
                if (j(a, b) < -tol) rep.failing_points.push_back(x);
            }
    }
    rep.margin = margin;
    rep.pass = rep.failing_points.empty();
    return rep;
}

HypothesisReport check_irreducible(const Model& model, const std::vector<Vec>& grid,
                                   double tol) {
    HypothesisReport rep;
    rep.which = "H1-irreducible";
    rep.grid_desc = describe_grid(grid.size(), model.dim);
    rep.params["tol"] = tol;
    for (const Vec& x : grid)
        if (!strongly_connected(model.jacobian(x), tol)) rep.failing_points.push_back(x);
    rep.margin = -static_cast<double>(rep.failing_points.size());
    rep.pass = rep.failing_points.empty();
    return rep;
}

HypothesisReport verify_h2(const Model& model, const LyapunovQuadratic& V, double gamma,
                           double eps0, double R, const std::vector<Vec>& grid) {
    HypothesisReport rep;
    rep.which = "H2";
    rep.grid_desc = describe_grid(grid.size(), model.dim);
    rep.params = {{"gamma", gamma}, {"eps0", eps0}, {"R", R}};
    const Mat hess = V.hessian();
    double margin = std::numeric_limits<double>::infinity();
    for (const Vec& x : grid) {
        if (x.norm() < R) continue;
        const double drift_term = model.drift(x).dot(V.gradient(x));
        const Mat s = model.sigma(x);
        const double trace_term = (s.transpose() * hess * s).trace();
        for (double eps : {0.0, eps0}) {
            const double expr = drift_term + 0.5 * eps * eps * trace_term;
            const double slack = -gamma - expr;  // >= 0 means the bound holds
            if (slack < margin) margin = slack;
            if (slack < 0.0) rep.failing_points.push_back(x);
        }
    }
    rep.margin = margin;
    rep.pass = std::isfinite(margin) && rep.failing_points.empty();
    if (!std::isfinite(margin)) rep.pass = false;  // empty effective grid
    return rep;
}

HypothesisReport verify_h3(const Model& model, const LyapunovQuadratic& V, double theta,
                           double eta, double C, double M, const std::vector<Vec>& grid,
                           double origin_exclusion) {
    HypothesisReport rep;
    rep.which = "H3";
    rep.grid_desc = describe_grid(grid.size(), model.dim);
    rep.params = {{"theta", theta}, {"eta", eta}, {"C", C}, {"M", M}};
    const Mat hess = V.hessian();
    double margin = std::numeric_limits<double>::infinity();
    for (const Vec& x : grid) {
        if (x.norm() < origin_exclusion) continue;
        const double v = V.value(x);
        const Vec grad = V.gradient(x);
        const Mat s = model.sigma(x);
        const double trace_term = (s.transpose() * hess * s).trace();
        const double quotient = (s.transpose() * grad).squaredNorm() / (eta * v);
        const double lhs = model.drift(x).dot(grad) + 0.5 * theta * trace_term + quotient;
        const double slack_growth = C * (1.0 + v) - lhs;
        const double slack_trace = trace_term + M + C * v;
        const double slack = std::min(slack_growth, slack_trace);
        if (slack < margin) margin = slack;
        if (slack < 0.0) rep.failing_points.push_back(x);
    }
    rep.margin = margin;
    rep.pass = std::isfinite(margin) && rep.failing_points.empty();
    return rep;
}

H3Constants h3_constants_recipe(const Model& model, const LyapunovQuadratic& V,
                                double c_growth, const std::vector<Vec>& grid) {
    H3Constants k;
    const double trace_b = V.B.trace();
    const double norm_b = V.B.operatorNorm();
    const double lambda1 = V.min_eigenvalue();
    // Make each of the two quadratic contributions eat at most 1/4 of the
    // leading -|x|^2 decay.
    k.theta = 1.0 / (4.0 * c_growth * trace_b);
    k.eta = 8.0 * c_growth * norm_b * norm_b / lambda1;
    const Mat hess = V.hessian();
    double lhs_max = 0.0;
    for (const Vec& x : grid) {
        if (x.norm() < 1e-3) continue;
        const Vec grad = V.gradient(x);
        const Mat s = model.sigma(x);
        const double lhs = model.drift(x).dot(grad) +
                           0.5 * k.theta * (s.transpose() * hess * s).trace() +
                           (s.transpose() * grad).squaredNorm() / (k.eta * V.value(x));
        lhs_max = std::max(lhs_max, lhs);
    }
    k.C = lhs_max * 1.01 + 1e-12;
    k.M = k.C;
    return k;
}

double local_lipschitz_estimate(const Model& model, const std::vector<Vec>& grid, double h) {
    double worst = 0.0;
    for (const Vec& x : grid) {
        for (int k = 0; k < model.dim; ++k) {
            Vec xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const double qb =
                (model.drift(xp) - model.drift(xm)).lpNorm<Eigen::Infinity>() / (2.0 * h);
            const double qs =
                (model.sigma(xp) - model.sigma(xm)).cwiseAbs().maxCoeff() / (2.0 * h);
            worst = std::max({worst, qb, qs});
        }
    }
    return worst;
}

}  // namespace coopstab
