#include "coopstab/action.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "coopstab/parallel.hpp"

namespace coopstab {

namespace {

constexpr double kConditionLimit = 1e12;

/// Evaluates a(u)^{-1}-weighted residuals, with the factorization cached
/// when the diffusion matrix is constant.
class NoiseWeight {
  public:
    explicit NoiseWeight(const Model& model) : model_(model) {
        if (model.sigma_constant) {
            const Mat a = model.noise_covariance(Vec::Zero(model.dim));
            check(a);
            llt_.compute(a);
        }
    }

    /// w = a(u)^{-1} r.
    Vec weight(const Vec& u, const Vec& r) const {
        if (model_.sigma_constant) return llt_.solve(r);
        const Mat a = model_.noise_covariance(u);
        check(a);
        return Eigen::LLT<Mat>(a).solve(r);
    }

  private:
    static void check(const Mat& a) {
        Eigen::SelfAdjointEigenSolver<Mat> es(a);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > kConditionLimit)
            throw std::runtime_error("degenerate diffusion");
    }

    const Model& model_;
    Eigen::LLT<Mat> llt_;
};

void validate(const DiscretePath& path) {
    if (path.times.size() < 2 || path.times.size() != path.nodes.size())
        throw std::invalid_argument("path: needs at least two nodes and matching grids");
    for (std::size_t i = 1; i < path.times.size(); ++i)
        if (!(path.times[i] > path.times[i - 1]))
            throw std::invalid_argument("path: times must be strictly increasing");
}

/// d a / d u_k, analytic when the model carries sigma partials, otherwise by
/// central differences of the covariance.
Mat covariance_partial(const Model& model, const Vec& u, int k) {
    if (model.sigma_partial) {
        const Mat s = model.sigma(u);
        const Mat ds = model.sigma_partial(u, k);
        return ds * s.transpose() + s * ds.transpose();
    }
    const double h = 1e-6 * std::max(1.0, std::abs(u[k]));
    Vec up = u, um = u;
    up[k] += h;
    um[k] -= h;
    return (model.noise_covariance(up) - model.noise_covariance(um)) / (2.0 * h);
}

double action_impl(const Model& model, const DiscretePath& path, const NoiseWeight& nw,
                   Vec* grad) {
    const int r = model.dim;
    const int n = path.segments();
    if (grad) grad->setZero();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dt = path.times[i + 1] - path.times[i];
        const Vec mid = 0.5 * (path.nodes[i] + path.nodes[i + 1]);
        const Vec vel = (path.nodes[i + 1] - path.nodes[i]) / dt;
        const Vec res = vel - model.drift(mid);
        const Vec w = nw.weight(mid, res);
        total += 0.5 * dt * res.dot(w);
        if (!grad) continue;

        // dL/du at the midpoint
        Vec lu = -model.jacobian(mid).transpose() * w;
        if (!model.sigma_constant)
            for (int k = 0; k < r; ++k)
                lu[k] -= 0.5 * w.dot(covariance_partial(model, mid, k) * w);

        // node i gets dt (lu/2 - w/dt), node i+1 gets dt (lu/2 + w/dt)
        if (i > 0)
            grad->segment((i - 1) * r, r) += 0.5 * dt * lu - w;
        if (i + 1 < n)
            grad->segment(i * r, r) += 0.5 * dt * lu + w;
    }
    return total;
}

}  // namespace

double lagrangian(const Model& model, const Vec& u, const Vec& beta) {
    NoiseWeight nw(model);
    const Vec res = beta - model.drift(u);
    return 0.5 * res.dot(nw.weight(u, res));
}

double path_action(const Model& model, const DiscretePath& path) {
    validate(path);
    NoiseWeight nw(model);
    return action_impl(model, path, nw, nullptr);
}

Vec action_gradient(const Model& model, const DiscretePath& path) {
    validate(path);
    if (path.segments() < 2)
        throw std::invalid_argument("action_gradient: no interior nodes");
    NoiseWeight nw(model);
    Vec grad((path.segments() - 1) * model.dim);
    action_impl(model, path, nw, &grad);
    return grad;
}

DiscretePath lif_path(const Vec& x, const Vec& y, int n_segments) {
    const double len = (y - x).norm();
    if (len == 0.0) throw std::invalid_argument("degenerate LIF");
    if (n_segments < 1) throw std::invalid_argument("lif_path: n_segments must be >= 1");
    DiscretePath path;
    path.times.reserve(n_segments + 1);
    path.nodes.reserve(n_segments + 1);
    for (int j = 0; j <= n_segments; ++j) {
        const double s = static_cast<double>(j) / n_segments;
        path.times.push_back(s * len);
        path.nodes.push_back(x + s * (y - x));
    }
    return path;
}

double lif_action_constant(const Model& model, const Vec& box_lo, const Vec& box_hi,
                           int per_dim) {
    double worst = 0.0;
    std::vector<int> idx(model.dim, 0);
    const long total = static_cast<long>(std::pow(per_dim, model.dim));
    for (long flat = 0; flat < total; ++flat) {
        Vec p(model.dim);
        long rem = flat;
        for (int d = 0; d < model.dim; ++d) {
            const int k = static_cast<int>(rem % per_dim);
            rem /= per_dim;
            p[d] = per_dim == 1 ? box_lo[d]
                                : box_lo[d] + (box_hi[d] - box_lo[d]) * k / (per_dim - 1);
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(model.noise_covariance(p));
        const double lo = es.eigenvalues().minCoeff();
        if (!(lo > 0.0)) throw std::runtime_error("degenerate diffusion");
        const double speed = 1.0 + model.drift(p).norm();
        worst = std::max(worst, 0.5 * speed * speed / lo);
    }
    return worst;
}

DiscretePath path_from_trajectory(const Trajectory& traj) {
    DiscretePath path;
    path.times = traj.times;
    path.nodes = traj.states;
    return path;
}

DiscretePath resample_path(const DiscretePath& path, int n_segments) {
    validate(path);
    if (n_segments < 1) throw std::invalid_argument("resample_path: n_segments must be >= 1");
    const double T = path.duration();
    DiscretePath out;
    out.times.reserve(n_segments + 1);
    out.nodes.reserve(n_segments + 1);
    std::size_t seg = 0;
    for (int j = 0; j <= n_segments; ++j) {
        const double t = T * j / n_segments;
        while (seg + 2 < path.times.size() && path.times[seg + 1] < t) ++seg;
        const double t0 = path.times[seg], t1 = path.times[seg + 1];
        const double s = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        out.times.push_back(t);
        out.nodes.push_back(path.nodes[seg] + s * (path.nodes[seg + 1] - path.nodes[seg]));
    }
    return out;
}

namespace {

void append_path(DiscretePath& dst, const DiscretePath& piece) {
    if (dst.times.empty()) {
        dst = piece;
        return;
    }
    const double offset = dst.times.back();
    // junction node is shared
    for (std::size_t i = 1; i < piece.times.size(); ++i) {
        dst.times.push_back(offset + piece.times[i]);
        dst.nodes.push_back(piece.nodes[i]);
    }
}

DiscretePath arc_crawl(const Model& model, const std::vector<Vec>& arc, double budget) {
    DiscretePath crawl;
    if (arc.size() < 2) return crawl;
    const int segments = static_cast<int>(arc.size()) - 1;
    double speed_max = 0.0;   // M: max parameterization speed over [0, 1]
    double lambda0 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < arc.size(); ++j) {
        if (j + 1 < arc.size())
            speed_max = std::max(speed_max, (arc[j + 1] - arc[j]).norm() * segments);
        Eigen::SelfAdjointEigenSolver<Mat> es(model.noise_covariance(arc[j]));
        lambda0 = std::min(lambda0, es.eigenvalues().minCoeff());
    }
    if (!(lambda0 > 0.0)) throw std::runtime_error("degenerate diffusion");
    const double tau = lambda0 * budget / (speed_max * speed_max);
    const double t1 = 1.0 / tau;  // crawl duration
    for (int j = 0; j <= segments; ++j) {
        crawl.times.push_back(t1 * j / segments);
        crawl.nodes.push_back(arc[j]);
    }
    return crawl;
}

}  // namespace

DiscretePath escape_path(const Model& model, const Vec& y, double delta, const Vec& v,
                         const Vec& attractor_point, const EscapeOptions& opts) {
    DiscretePath path;
    Vec start = y;

    if (opts.arc && opts.arc->size() >= 2) {
        if (((*opts.arc).front() - y).lpNorm<Eigen::Infinity>() > 1e-9)
            throw std::invalid_argument("escape_path: arc must start at y");
        append_path(path, arc_crawl(model, *opts.arc, opts.arc_budget));
        start = opts.arc->back();
    }

    if (delta > 0.0) {
        const Vec dir = v / v.norm();
        const Vec off = start + delta * dir;
        const int lif_segments = 8;
        append_path(path, lif_path(start, off, lif_segments));
        start = off;
    } else if (path.times.empty()) {
        path.times.push_back(0.0);
        path.nodes.push_back(start);
    }

    // flow until close to the attractor point
    const double reach = opts.reach_tol > 0.0 ? opts.reach_tol : std::max(delta, 1e-12);
    Vec x = start;
    double t = 0.0;
    bool arrived = (x - attractor_point).norm() <= reach;
    int settle_streak = 0;
    DiscretePath flow_piece;
    flow_piece.times.push_back(0.0);
    flow_piece.nodes.push_back(x);
    while (!arrived && t < opts.T_max) {
        x = rk4_step(model, x, opts.step);
        t += opts.step;
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > opts.blowup_guard)
            throw BlowupError("non-dissipative escape");
        flow_piece.times.push_back(t);
        flow_piece.nodes.push_back(x);
        if ((x - attractor_point).norm() <= reach) {
            arrived = true;
            break;
        }
        if (model.drift(x).lpNorm<Eigen::Infinity>() < opts.settle_tol) {
            if (++settle_streak >= 10) break;  // settled, possibly elsewhere
        } else {
            settle_streak = 0;
        }
    }
    if (!arrived)
        throw std::runtime_error("escape_path: flow did not approach the attractor point");
    if (flow_piece.times.size() > 1) append_path(path, flow_piece);

    if ((x - attractor_point).norm() > 0.0) {
        const int lif_segments = 8;
        append_path(path, lif_path(x, attractor_point, lif_segments));
    }
    return path;
}

namespace {

DiscretePath straight_line(const Vec& x, const Vec& y, double T, int n_segments) {
    DiscretePath path;
    path.times.reserve(n_segments + 1);
    path.nodes.reserve(n_segments + 1);
    for (int j = 0; j <= n_segments; ++j) {
        const double s = static_cast<double>(j) / n_segments;
        path.times.push_back(T * s);
        path.nodes.push_back(x + s * (y - x));
    }
    return path;
}

}  // namespace

QuasipotentialEstimate minimize_action(const Model& model, const Vec& x, const Vec& y,
                                       double T, int n_segments, const DiscretePath* init,
                                       const MinimizeOptions& opts) {
    if (!(T > 0.0)) throw std::invalid_argument("minimize_action: T must be positive");
    if (n_segments < 2) throw std::invalid_argument("minimize_action: needs interior nodes");
    const int r = model.dim;

    DiscretePath path;
    if (init) {
        path = resample_path(*init, n_segments);
        for (int j = 0; j <= n_segments; ++j) path.times[j] = T * j / n_segments;
        path.nodes.front() = x;
        path.nodes.back() = y;
    } else {
        path = straight_line(x, y, T, n_segments);
    }

    NoiseWeight nw(model);
    const int nfree = (n_segments - 1) * r;
    auto write_free = [&](const Vec& p) {
        for (int j = 1; j < n_segments; ++j) path.nodes[j] = p.segment((j - 1) * r, r);
    };
    auto read_free = [&]() {
        Vec p(nfree);
        for (int j = 1; j < n_segments; ++j) p.segment((j - 1) * r, r) = path.nodes[j];
        return p;
    };

    Vec p = read_free();
    Vec grad(nfree);
    double value = action_impl(model, path, nw, &grad);

    QuasipotentialEstimate est;
    est.T_used = T;

    Vec p_prev = p, grad_prev = grad;
    double alpha = 1.0 / std::max(1.0, grad.lpNorm<Eigen::Infinity>());
    int iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        const double gnorm = grad.lpNorm<Eigen::Infinity>();
        if (gnorm < opts.grad_tol) {
            est.diag.converged = true;
            break;
        }
        const double gg = grad.squaredNorm();
        double step = alpha;
        bool accepted = false;
        Vec p_try;
        double v_try = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            p_try = p - step * grad;
            write_free(p_try);
            v_try = action_impl(model, path, nw, nullptr);
            if (v_try <= value - opts.armijo_c * step * gg) {
                accepted = true;
                break;
            }
            step *= opts.backtrack;
        }
        if (!accepted) {
            est.diag.line_search_failed = true;
            write_free(p);
            break;
        }
        p_prev = p;
        grad_prev = grad;
        p = p_try;
        value = v_try;
        write_free(p);
        value = action_impl(model, path, nw, &grad);
        // Barzilai-Borwein trial step for the next iteration
        const Vec s = p - p_prev;
        const Vec dg = grad - grad_prev;
        const double sy = s.dot(dg);
        alpha = sy > 0.0 ? std::clamp(s.dot(s) / sy, 1e-12, 1e12) : step * 2.0;
    }

    est.diag.iterations = iter;
    est.diag.grad_norm = grad.lpNorm<Eigen::Infinity>();
    write_free(p);
    est.value = value;
    path.cached_action = value;
    est.path = std::move(path);
    return est;
}

QuasipotentialEstimate quasipotential(const Model& model, const Vec& x, const Vec& y,
                                      const std::vector<double>& T_grid, int n_segments,
                                      const QuasipotentialOptions& opts) {
    if (T_grid.empty()) throw std::invalid_argument("quasipotential: empty horizon grid");
    if ((x - y).lpNorm<Eigen::Infinity>() < 1e-14) {
        // constant path over a vanishing horizon realizes the infimum
        QuasipotentialEstimate est;
        est.path.times = {0.0, 1e-9};
        est.path.nodes = {x, y};
        est.value = path_action(model, est.path);
        est.path.cached_action = est.value;
        est.T_used = 1e-9;
        est.diag.converged = true;
        return est;
    }

    // Escape-construction seed, available when the flow just off x reaches y.
    std::optional<DiscretePath> escape_seed;
    if (opts.try_escape_seed) {
        std::vector<Vec> dirs;
        if (auto u = unstable_direction(model, x)) dirs.push_back(*u);
        dirs.push_back(Vec::Ones(model.dim).normalized());
        for (const Vec& d : dirs) {
            for (double sign : {1.0, -1.0}) {
                EscapeOptions eo = opts.escape;
                if (eo.reach_tol == 0.0) eo.reach_tol = opts.reach_ball;
                try {
                    escape_seed = escape_path(model, x, opts.escape_delta, sign * d, y, eo);
                } catch (const std::exception&) {
                    continue;
                }
                break;
            }
            if (escape_seed) break;
        }
    }

    struct Candidate {
        double T;
        const DiscretePath* init;
    };
    std::vector<Candidate> cands;
    for (double T : T_grid) cands.push_back({T, nullptr});
    if (escape_seed)
        cands.push_back({escape_seed->duration(), &*escape_seed});

    std::vector<QuasipotentialEstimate> results(cands.size());
    parallel_for(static_cast<int>(cands.size()), opts.threads, [&](int i) {
        results[i] =
            minimize_action(model, x, y, cands[i].T, n_segments, cands[i].init, opts.minimize);
    });

    // the raw escape construction is itself a valid (unoptimized) candidate
    if (escape_seed) {
        QuasipotentialEstimate raw;
        raw.path = *escape_seed;
        raw.value = path_action(model, raw.path);
        raw.path.cached_action = raw.value;
        raw.T_used = raw.path.duration();
        results.push_back(std::move(raw));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].value < results[best].value) best = i;
    return results[best];
}

bool level_set_member(const Model& model, const DiscretePath& path, const Vec& x, double s) {
    validate(path);
    if ((path.nodes.front() - x).lpNorm<Eigen::Infinity>() > 1e-9)
        throw std::invalid_argument("level_set_member: path does not start at x");
    if (std::isinf(s) && s > 0.0) return true;
    return path_action(model, path) <= s;
}

}  // namespace coopstab
