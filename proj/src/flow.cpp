#include "coopstab/flow.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "coopstab/order.hpp"
#include "coopstab/parallel.hpp"
#include "coopstab/rng.hpp"

namespace coopstab {

namespace {

void guard(const Vec& x, double limit) {
    if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > limit)
        throw BlowupError("non-dissipative escape");
}

}  // namespace

Vec rk4_step(const Model& model, const Vec& x, double h) {
    const Vec k1 = model.drift(x);
    const Vec k2 = model.drift(x + 0.5 * h * k1);
    const Vec k3 = model.drift(x + 0.5 * h * k2);
    const Vec k4 = model.drift(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const Model& model, const Vec& x0, double T, double step,
                     const FlowOptions& opts) {
    if (!(T > 0.0) || !(step > 0.0))
        throw std::invalid_argument("integrate: T and step must be positive");
    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(T / step) + 2);
    traj.states.reserve(traj.times.capacity());
    Vec x = x0;
    double t = 0.0;
    guard(x, opts.blowup_guard);
    traj.times.push_back(t);
    traj.states.push_back(x);
    while (t < T) {
        const double h = std::min(step, T - t);
        x = rk4_step(model, x, h);
        t = (T - t <= step) ? T : t + h;
        guard(x, opts.blowup_guard);
        traj.times.push_back(t);
        traj.states.push_back(x);
    }
    return traj;
}

AttractorProbe omega_limit_probe(const Model& model, const Vec& x0, double T_max,
                                 double settle_tol, const ProbeOptions& opts) {
    AttractorProbe probe;
    probe.seed = x0;
    Vec x = x0;
    double t = 0.0;
    int streak = 0;
    guard(x, opts.blowup_guard);
    while (t < T_max) {
        x = rk4_step(model, x, opts.step);
        t += opts.step;
        guard(x, opts.blowup_guard);
        if (model.drift(x).lpNorm<Eigen::Infinity>() < settle_tol) {
            if (++streak >= opts.settle_streak) {
                probe.point = x;
                probe.time = t;
                probe.residual = model.drift(x).lpNorm<Eigen::Infinity>();
                probe.converged = true;
                return probe;
            }
        } else {
            streak = 0;
        }
    }
    probe.point = x;
    probe.time = t;
    probe.residual = model.drift(x).lpNorm<Eigen::Infinity>();
    probe.converged = false;
    return probe;
}

MonotonicityReport check_monotonicity(const Model& model, int n_pairs, double T,
                                      std::uint64_t seed, const MonotonicityOptions& opts) {
    const int r = model.dim;
    Vec lo = opts.box_lo.size() == r ? opts.box_lo : Vec(Vec::Constant(r, -2.0));
    Vec hi = opts.box_hi.size() == r ? opts.box_hi : Vec(Vec::Constant(r, 2.0));

    MonotonicityReport rep;
    rep.pairs = n_pairs;
    std::vector<int> weak(n_pairs, 0), strong(n_pairs, 0);
    std::vector<std::pair<Vec, Vec>> bad(n_pairs);

    parallel_for(n_pairs, opts.threads, [&](int i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        Vec x(r), y(r);
        for (int d = 0; d < r; ++d) {
            const double u = rng.uniform(2 * d);
            const double g = rng.uniform(2 * d + 1);
            x[d] = lo[d] + (hi[d] - lo[d]) * u;
            y[d] = x[d] + 0.25 * (hi[d] - lo[d]) * g;  // nonnegative gap
        }
        const Vec xt = integrate(model, x, T, opts.step).final_state();
        const Vec yt = integrate(model, y, T, opts.step).final_state();
        if (!leq(xt, yt, opts.tol)) {
            weak[i] = 1;
            bad[i] = {x, y};
        } else if (strictly_less(x, y) && T >= 1.0 && (yt - xt).minCoeff() <= opts.tol) {
            // strict pairs must come out with a genuine componentwise gap
            strong[i] = 1;
            bad[i] = {x, y};
        }
    });

    for (int i = 0; i < n_pairs; ++i) {
        rep.weak_violations += weak[i];
        rep.strong_violations += strong[i];
        if (weak[i] || strong[i]) rep.failures.push_back(bad[i]);
    }
    rep.pass = rep.weak_violations == 0 && rep.strong_violations == 0;
    return rep;
}

AttractorProbe dual_attractor(const Model& model, const Vec& k_sup, double delta,
                              const Vec& v, const DualAttractorOptions& opts) {
    if (delta != 0.0 && v.size() != k_sup.size())
        throw std::invalid_argument("dual_attractor: direction dimension mismatch");
    Vec start = k_sup;
    if (delta != 0.0) start += delta * (v / v.norm());
    AttractorProbe probe =
        omega_limit_probe(model, start, opts.T_max, opts.probe.settle_tol, opts.probe);
    probe.seed = k_sup;
    return probe;
}

std::optional<Vec> unstable_direction(const Model& model, const Vec& p) {
    Eigen::EigenSolver<Mat> es(model.jacobian(p));
    int best = -1;
    double best_re = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const auto ev = es.eigenvalues()[i];
        if (ev.real() > best_re && std::abs(ev.imag()) < 1e-12) {
            best_re = ev.real();
            best = i;
        }
    }
    if (best < 0) return std::nullopt;
    Vec dir = es.eigenvectors().col(best).real();
    dir.normalize();
    if (dir.sum() < 0.0) dir = -dir;
    return dir;
}

}  // namespace coopstab
