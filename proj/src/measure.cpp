#include "coopstab/measure.hpp"

#include <algorithm>
#include <cmath>

#include "coopstab/parallel.hpp"
#include "coopstab/sde.hpp"

namespace coopstab {

long HistogramGrid::cells() const {
    long n = 1;
    for (int b : bins) n *= b;
    return n;
}

void HistogramGrid::validate() const {
    if (bins.empty() || lo.size() != dim() || hi.size() != dim())
        throw std::invalid_argument("histogram grid: inconsistent dimensions");
    for (int b : bins)
        if (b < 1) throw std::invalid_argument("histogram grid: bins must be >= 1");
    for (int d = 0; d < dim(); ++d)
        if (!(lo[d] < hi[d])) throw std::invalid_argument("histogram grid: lo must be < hi");
}

std::optional<long> HistogramGrid::locate(const Vec& x) const {
    long flat = 0;
    long stride = 1;
    for (int d = 0; d < dim(); ++d) {
        if (x[d] < lo[d] || x[d] >= hi[d]) return std::nullopt;
        const int k = static_cast<int>((x[d] - lo[d]) / (hi[d] - lo[d]) * bins[d]);
        flat += stride * std::min(k, bins[d] - 1);
        stride *= bins[d];
    }
    return flat;
}

Vec HistogramGrid::center(long flat) const {
    Vec c(dim());
    for (int d = 0; d < dim(); ++d) {
        const int k = static_cast<int>(flat % bins[d]);
        flat /= bins[d];
        c[d] = lo[d] + (hi[d] - lo[d]) * (k + 0.5) / bins[d];
    }
    return c;
}

double StationaryEstimate::second_moment() const {
    double m2 = 0.0;
    for (long i = 0; i < static_cast<long>(weights.size()); ++i)
        if (weights[i] > 0.0) m2 += weights[i] * grid.center(i).squaredNorm();
    return m2;
}

namespace {

/// Distance used for equilibrium ball masses; for Griffith models the
/// components are measured in units of the equilibrium ray.
double ball_distance(const Vec& x, const Vec& center, const std::optional<Vec>& ray) {
    if (!ray) return (x - center).norm();
    double s = 0.0;
    for (Eigen::Index d = 0; d < x.size(); ++d) {
        const double g = (x[d] - center[d]) / (*ray)[d];
        s += g * g;
    }
    return std::sqrt(s);
}

}  // namespace

StationaryEstimate estimate_stationary(const Model& model, const Vec& x0, double eps,
                                       double T_total, double step, std::uint64_t seed,
                                       const HistogramGrid& grid,
                                       const std::vector<Vec>& centers,
                                       const StationaryOptions& opts) {
    grid.validate();
    if (!(opts.burn_in >= 0.0 && opts.burn_in < 1.0))
        throw std::invalid_argument("estimate_stationary: burn_in must be in [0, 1)");

    StationaryEstimate est;
    est.eps = eps;
    est.grid = grid;
    est.burn_in = opts.burn_in;
    est.weights.assign(grid.cells(), 0.0);
    est.ball_masses.assign(centers.size(), 0.0);

    std::optional<Vec> ray;
    if (opts.ray_scaled_metric && model.griffith) ray = griffith_ray(*model.griffith);

    const double t_start = opts.burn_in * T_total;
    long inside = 0, outside = 0;
    std::vector<long> ball_counts(centers.size(), 0);
    long counted = 0;

    const auto status = sde_walk(
        model, x0, eps, T_total, step, seed, /*stream=*/0,
        [&](double t, const Vec& x) {
            if (t < t_start) return;
            ++counted;
            if (auto cell = grid.locate(x)) {
                est.weights[*cell] += 1.0;
                ++inside;
            } else {
                ++outside;
            }
            for (std::size_t c = 0; c < centers.size(); ++c)
                if (ball_distance(x, centers[c], ray) < opts.ball_radius) ++ball_counts[c];
        },
        {.blowup_guard = opts.blowup_guard});

    est.total_samples = counted;
    if (status == WalkStatus::BlownUp) {
        est.valid = false;
        est.flag = "blow-up";
    }
    if (inside > 0)
        for (double& w : est.weights) w /= static_cast<double>(inside);
    if (counted > 0) {
        est.outside_fraction = static_cast<double>(outside) / counted;
        for (std::size_t c = 0; c < centers.size(); ++c)
            est.ball_masses[c] = static_cast<double>(ball_counts[c]) / counted;
    }
    return est;
}

SupportPrediction table1_predict(double m, double phi) {
    if (!(m >= 1.0) || !(phi > 0.0))
        throw std::invalid_argument("table1_predict: need m >= 1 and phi > 0");
    return predict_zero_noise_support(m, phi);
}

ConcentrationReport concentration_sweep(const Model& model, const std::vector<double>& eps_list,
                                        std::uint64_t seed, const SweepOptions& opts) {
    if (eps_list.empty()) throw std::invalid_argument("concentration_sweep: empty eps list");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("concentration_sweep: eps must decrease");

    ConcentrationReport rep;
    std::vector<Vec> stable = opts.stable_centers;
    std::vector<Vec> unstable = opts.unstable_centers;
    std::optional<GriffithClassification> cls;
    if (model.griffith) {
        cls = classify_griffith(*model.griffith);
        rep.predicted = cls->summary.predicted;
        if (stable.empty()) stable = cls->stable_set();
        if (unstable.empty()) unstable = cls->unstable_set();
    }
    if (stable.empty())
        throw std::invalid_argument("concentration_sweep: no stable centers available");

    Vec x0 = opts.x0;
    if (x0.size() != model.dim) {
        if (!model.griffith)
            throw std::invalid_argument("concentration_sweep: x0 required for this model");
        x0 = griffith_ray(*model.griffith);
    }

    HistogramGrid grid = opts.grid;
    if (grid.bins.empty()) {
        // window covering all centers with generous noise padding
        double extent = 1.0;
        for (const auto& c : stable) extent = std::max(extent, c.lpNorm<Eigen::Infinity>());
        extent = 2.0 * extent + 1.0;
        grid.lo = Vec::Constant(model.dim, -extent);
        grid.hi = Vec::Constant(model.dim, extent);
        grid.bins.assign(model.dim, 50);
    }

    std::vector<Vec> centers = stable;
    centers.insert(centers.end(), unstable.begin(), unstable.end());

    const int n = static_cast<int>(eps_list.size());
    rep.rows.resize(n);
    rep.estimates.resize(n);
    parallel_for(n, opts.threads, [&](int i) {
        const double eps = eps_list[i];
        const double T_total =
            std::clamp(opts.t_scale / (eps * eps), opts.t_min, opts.t_cap);
        StationaryEstimate est =
            estimate_stationary(model, x0, eps, T_total, opts.step,
                                seed + static_cast<std::uint64_t>(i), grid, centers,
                                opts.stationary);
        ConcentrationRow row;
        row.eps = eps;
        row.T_total = T_total;
        row.valid = est.valid;
        for (std::size_t c = 0; c < stable.size(); ++c) row.stable_mass += est.ball_masses[c];
        for (std::size_t c = stable.size(); c < centers.size(); ++c)
            row.unstable_mass += est.ball_masses[c];
        row.leftover = std::max(0.0, 1.0 - row.stable_mass - row.unstable_mass);
        rep.rows[i] = row;
        rep.estimates[i] = std::move(est);
    });

    rep.monotone = true;
    for (int i = 1; i < n; ++i)
        if (rep.rows[i].stable_mass < rep.rows[i - 1].stable_mass - opts.monotone_slack)
            rep.monotone = false;

    if (cls) {
        // predicted support must coincide with the spectral stable set
        const auto predicted_pts = rep.predicted->support_points(*model.griffith);
        auto matches = [&](const std::vector<Vec>& a, const std::vector<Vec>& b) {
            if (a.size() != b.size()) return false;
            for (const auto& p : a) {
                bool found = false;
                for (const auto& q : b)
                    if ((p - q).lpNorm<Eigen::Infinity>() < 1e-7) found = true;
                if (!found) return false;
            }
            return true;
        };
        rep.agrees_with_classification = matches(predicted_pts, cls->stable_set());
    }
    return rep;
}

}  // namespace coopstab
