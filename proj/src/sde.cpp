#include "coopstab/sde.hpp"

#include <cmath>

#include "coopstab/parallel.hpp"

namespace coopstab {

Vec em_step(const Model& model, const Vec& x, double eps, double dt, const Vec& w) {
    Vec next = x + model.drift(x) * dt;
    if (eps != 0.0) next += eps * (model.sigma(x) * w);
    if (!next.allFinite()) throw BlowupError("numerical blow-up");
    return next;
}

WalkStatus sde_walk(const Model& model, const Vec& x0, double eps, double T, double step,
                    std::uint64_t seed, std::uint64_t stream,
                    const std::function<void(double, const Vec&)>& on_state,
                    const WalkOptions& opts) {
    if (!(T > 0.0) || !(step > 0.0))
        throw std::invalid_argument("sde_walk: T and step must be positive");
    const int r = model.dim;
    const RandomStream rng(seed, stream);
    const double sqrt_dt = std::sqrt(step);
    Vec x = x0;
    Vec w(r);
    on_state(0.0, x);
    const std::uint64_t n_steps = static_cast<std::uint64_t>(std::ceil(T / step - 1e-12));
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        rng.fill_normals(k * static_cast<std::uint64_t>(r), w);
        w *= sqrt_dt;
        try {
            x = em_step(model, x, eps, step, w);
        } catch (const BlowupError&) {
            return WalkStatus::BlownUp;
        }
        if (x.lpNorm<Eigen::Infinity>() > opts.blowup_guard) return WalkStatus::BlownUp;
        on_state((k + 1) * step, x);
    }
    return WalkStatus::Completed;
}

SdeRun simulate(const Model& model, const Vec& x0, double eps, double T, double step,
                std::uint64_t seed, const SimulateOptions& opts) {
    SdeRun run;
    run.eps = eps;
    run.step = step;
    run.seed = seed;
    run.stream = opts.stream;
    const auto status = sde_walk(
        model, x0, eps, T, step, seed, opts.stream,
        [&](double t, const Vec& x) {
            run.trajectory.times.push_back(t);
            run.trajectory.states.push_back(x);
        },
        {.blowup_guard = opts.blowup_guard});
    if (status == WalkStatus::BlownUp) throw BlowupError("blow-up guard");
    return run;
}

std::vector<SdeRun> ensemble(const Model& model, const Vec& x0, double eps, double T,
                             double step, int n_paths, std::uint64_t master_seed,
                             const EnsembleOptions& opts) {
    if (n_paths < 1) throw std::invalid_argument("ensemble: n_paths must be >= 1");
    std::vector<SdeRun> runs(n_paths);
    parallel_for(n_paths, opts.threads, [&](int i) {
        SdeRun& run = runs[i];
        run.eps = eps;
        run.step = step;
        run.seed = master_seed;
        run.stream = static_cast<std::uint64_t>(i);
        Vec last = x0;
        double last_t = 0.0;
        const auto status = sde_walk(
            model, x0, eps, T, step, master_seed, run.stream,
            [&](double t, const Vec& x) {
                if (opts.store_full_paths) {
                    run.trajectory.times.push_back(t);
                    run.trajectory.states.push_back(x);
                } else {
                    last = x;
                    last_t = t;
                }
            },
            {.blowup_guard = opts.blowup_guard});
        if (!opts.store_full_paths) {
            run.trajectory.times = {0.0, last_t};
            run.trajectory.states = {x0, last};
        }
        run.blown_up = status == WalkStatus::BlownUp;
    });
    return runs;
}

}  // namespace coopstab
