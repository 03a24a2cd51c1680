#include <doctest.h>

#include <cmath>

#include "coopstab/action.hpp"
#include "coopstab/equilibria.hpp"
#include "coopstab/rng.hpp"
#include "oracles.hpp"

using namespace coopstab;

namespace {

GriffithParams gp(std::vector<double> alphas, double m, double c = 1.0,
                  DiffusionSpec::Kind kind = DiffusionSpec::Kind::Const) {
    GriffithParams p;
    p.alphas = std::move(alphas);
    p.m = m;
    p.sigma = {kind, c};
    return p;
}

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Model free_brownian(int dim, double sigma_scale = 1.0) {
    Model m;
    m.dim = dim;
    m.drift = [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
    m.jacobian = [dim](const Vec&) { return Mat(Mat::Zero(dim, dim)); };
    m.sigma = [dim, sigma_scale](const Vec&) { return Mat(sigma_scale * Mat::Identity(dim, dim)); };
    m.sigma_constant = true;
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("action");

TEST_CASE("pointwise cost") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec u = v2(0.7, -0.3);
    CHECK(lagrangian(model, u, model.drift(u)) == doctest::Approx(0.0));

    Vec beta(2);
    beta << 3, 4;
    CHECK(lagrangian(free_brownian(2), Vec::Zero(2), beta) == doctest::Approx(12.5));

    Vec beta2(2);
    beta2 << 2, 0;
    CHECK(lagrangian(free_brownian(2, 2.0), Vec::Zero(2), beta2) == doctest::Approx(0.5));
}

TEST_CASE("degenerate diffusion is rejected") {
    Model flat = free_brownian(2);
    flat.sigma = [](const Vec&) {
        Mat s(2, 2);
        s << 1, 0, 0, 1e-9;
        return s;
    };
    CHECK_THROWS_WITH_AS(lagrangian(flat, Vec::Zero(2), Vec::Ones(2)), "degenerate diffusion",
                         std::runtime_error);
}

TEST_CASE("constant path at an equilibrium costs nothing") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    DiscretePath path;
    const Vec e = 2.0 * griffith_ray(*model.griffith);
    for (int j = 0; j <= 10; ++j) {
        path.times.push_back(0.5 * j);
        path.nodes.push_back(e);
    }
    CHECK(path_action(model, path) == doctest::Approx(0.0));
}

TEST_CASE("flow paths cost vanishes under refinement") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    auto cost = [&](double step) {
        const auto traj = integrate(model, v2(1.5, 0.2), 5.0, step);
        return path_action(model, path_from_trajectory(traj));
    };
    const double coarse = cost(0.1);
    const double fine = cost(0.05);
    CHECK(fine < coarse);
    CHECK(fine < 1e-6);
}

TEST_CASE("straight segments") {
    Vec x(2), y(2);
    x << 0, 0;
    y << 1, 0;
    const auto lif = lif_path(x, y, 2);
    REQUIRE(lif.nodes.size() == 3);
    CHECK(lif.duration() == doctest::Approx(1.0));
    CHECK(lif.nodes[1][0] == doctest::Approx(0.5));

    Vec far(2);
    far << 3, 4;
    CHECK(path_action(free_brownian(2), lif_path(x, far, 50)) == doctest::Approx(2.5));

    CHECK_THROWS_WITH_AS(lif_path(x, x, 4), "degenerate LIF", std::invalid_argument);
}

TEST_CASE("straight-segment cost constant bounds box segments") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec lo = Vec::Constant(2, -3.0), hi = Vec::Constant(2, 3.0);
    const double L = lif_action_constant(model, lo, hi, 9);
    RandomStream rng(17, 0);
    for (int i = 0; i < 40; ++i) {
        Vec a(2), b(2);
        for (int d = 0; d < 2; ++d) {
            a[d] = -3.0 + 6.0 * rng.uniform(10 * i + d);
            b[d] = -3.0 + 6.0 * rng.uniform(10 * i + d + 4);
        }
        if ((a - b).norm() < 1e-6) continue;
        CHECK(path_action(model, lif_path(a, b, 200)) <= L * (a - b).norm() * (1.0 + 1e-6));
    }
    // shrinking segments cost nothing in the limit
    Vec base = v2(0.3, -0.2);
    double prev = 1e9;
    for (double len : {1e-1, 1e-2, 1e-3}) {
        const double s = path_action(model, lif_path(base, base + Vec(len * v2(1, 1)), 20));
        CHECK(s < prev);
        prev = s;
    }
    CHECK(prev < 2e-3);
}

TEST_CASE("gradient matches central differences") {
    RandomStream rng(23, 0);
    std::vector<Model> models;
    models.push_back(ou_model(1.3, 2));
    models.push_back(griffith_model(gp({0.4, 1.0}, 2.0)));
    models.push_back(griffith_model(gp({0.7, 0.9}, 1.0, 0.5, DiffusionSpec::Kind::LinearGrowth)));
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const Model& model = models[mi];
        for (int trial = 0; trial < 8; ++trial) {
            DiscretePath path;
            const int n = 6;
            for (int j = 0; j <= n; ++j) {
                path.times.push_back(0.4 * j);
                Vec node(2);
                for (int d = 0; d < 2; ++d)
                    node[d] = 3.0 * rng.uniform(1000 * mi + 50 * trial + 2 * j + d) - 1.5;
                path.nodes.push_back(node);
            }
            const Vec g = action_gradient(model, path);
            Vec fd(g.size());
            for (int j = 1; j < n; ++j)
                for (int d = 0; d < 2; ++d) {
                    const double h = 1e-6;
                    DiscretePath pp = path, pm = path;
                    pp.nodes[j][d] += h;
                    pm.nodes[j][d] -= h;
                    fd[(j - 1) * 2 + d] =
                        (path_action(model, pp) - path_action(model, pm)) / (2 * h);
                }
            const double scale = std::max(1.0, fd.lpNorm<Eigen::Infinity>());
            CHECK((g - fd).lpNorm<Eigen::Infinity>() / scale < 1e-5);
        }
    }
}

TEST_CASE("escape construction off the saddle") {
    const auto p = gp({0.4, 1.0}, 2.0);
    const auto model = griffith_model(p);
    const Vec ray = griffith_ray(p);
    const Vec saddle = 0.5 * ray, sink = 2.0 * ray;
    const Vec v = ray / ray.norm();

    const double L1 = lif_action_constant(model, saddle - Vec::Constant(2, 0.6),
                                          saddle + Vec::Constant(2, 0.6), 7);
    const double L2 = lif_action_constant(model, sink - Vec::Constant(2, 0.6),
                                          sink + Vec::Constant(2, 0.6), 7);

    double prev = 0.0;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
        const auto path = escape_path(model, saddle, delta, v, sink);
        CHECK((path.nodes.front() - saddle).lpNorm<Eigen::Infinity>() < 1e-12);
        CHECK((path.nodes.back() - sink).lpNorm<Eigen::Infinity>() < 1e-12);
        const double s = path_action(model, path);
        CHECK(s <= (L1 + L2) * delta);
        if (prev > 0.0) {
            const double shrink = prev / s;
            CHECK(shrink > 5.0);  // roughly linear in delta
            CHECK(shrink < 20.0);
        }
        prev = s;
    }

    // starting inside the basin with delta = 0 rides the flow for free
    const auto free_ride = escape_path(model, Vec(1.2 * ray), 0.0, v, sink,
                                       {.reach_tol = 1e-4});
    CHECK(path_action(model, free_ride) < 1e-4);
}

TEST_CASE("arc crawl stays within its budget") {
    const auto model = ou_model(1.0, 2);
    // synthetic straight "arc" of nearly-stationary points near the origin
    std::vector<Vec> arc;
    for (int j = 0; j <= 10; ++j) arc.push_back(Vec::Constant(2, 1e-4 * j));
    EscapeOptions eo;
    eo.arc = arc;
    eo.arc_budget = 1e-2;
    eo.reach_tol = 0.5;
    const auto path = escape_path(model, arc.front(), 1e-3, Vec::Ones(2), Vec::Zero(2), eo);
    CHECK(path_action(model, path) < 2e-2);
}

TEST_CASE("descent never increases the cost") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec ray = griffith_ray(*model.griffith);
    for (double T : {2.0, 5.0}) {
        const auto est = minimize_action(model, Vec(2.0 * ray), Vec(0.5 * ray), T, 60);
        DiscretePath straight;
        for (int j = 0; j <= 60; ++j) {
            const double s = j / 60.0;
            straight.times.push_back(T * s);
            straight.nodes.push_back(2.0 * ray + s * (0.5 * ray - 2.0 * ray));
        }
        CHECK(est.value <= path_action(model, straight) + 1e-12);
        CHECK(est.value >= 0.0);
        CHECK(est.value == doctest::Approx(path_action(model, est.path)).epsilon(1e-9));
    }
}

TEST_CASE("scalar OU transition cost matches the gradient identity") {
    const auto ou = ou_model(1.0);
    const auto est = minimize_action(ou, Vec::Zero(1), Vec::Ones(1), 10.0, 100);
    CHECK(est.value ==
          doctest::Approx(oracles::ou_quasipotential(1.0, 0.0, 1.0)).epsilon(0.02));
}

TEST_CASE("zero-cost cases") {
    const auto ou = ou_model(1.0);
    // y on the forward orbit of x: horizon grid contains the right travel time
    const Vec x = Vec::Ones(1);
    const Vec y = Vec::Constant(1, std::exp(-1.0));
    QuasipotentialOptions qo;
    qo.try_escape_seed = false;
    const auto est = quasipotential(ou, x, y, {0.5, 1.0, 2.0}, 100, qo);
    CHECK(est.value < 1e-3);

    const auto same = quasipotential(ou, x, x, {1.0}, 50);
    CHECK(same.value < 1e-6);
}

TEST_CASE("uphill costs, downhill rides") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec ray = griffith_ray(*model.griffith);
    QuasipotentialOptions qo;
    qo.minimize.max_iters = 4000;

    const auto down = quasipotential(model, Vec(0.5 * ray), Vec(2.0 * ray), {5.0, 10.0}, 80, qo);
    CHECK(down.value < 0.05);

    const auto up = quasipotential(model, Vec(2.0 * ray), Vec(0.5 * ray), {5.0, 10.0}, 80, qo);
    CHECK(up.value > 0.01);
    CHECK(up.value > 10.0 * down.value);
}

TEST_CASE("optimizer beats the random probe") {
    const auto ou = ou_model(1.0);
    const double probe = oracles::random_path_probe(ou, Vec::Zero(1), Vec::Ones(1), 10.0, 200, 3);
    const auto est = minimize_action(ou, Vec::Zero(1), Vec::Ones(1), 10.0, 100);
    CHECK(est.value <= probe + 1e-9);
    CHECK(probe >= 0.95);  // identity floor

    // a flow-reachable target admits a near-free candidate
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec from = 1.2 * griffith_ray(*model.griffith);
    const auto to = integrate(model, from, 3.0, 1e-2).final_state();
    CHECK(oracles::random_path_probe(model, from, to, 6.0, 64, 4) < 1e-2);

    // with a single trial the probe is exactly the straight segment
    const double lone = oracles::random_path_probe(ou, Vec::Zero(1), Vec::Ones(1), 10.0, 1, 5);
    CHECK(lone == doctest::Approx(path_action(ou, lif_path(Vec::Zero(1), Vec::Ones(1), 100))));
}

TEST_CASE("triangle inequality on sampled scalar triples") {
    const auto ou = ou_model(1.0);
    RandomStream rng(41, 0);
    QuasipotentialOptions qo;
    qo.try_escape_seed = false;
    qo.minimize.max_iters = 20000;
    const std::vector<double> T_grid{5.0, 10.0, 20.0};
    for (int i = 0; i < 6; ++i) {
        Vec x(1), y(1), z(1);
        x[0] = 3.0 * rng.uniform(3 * i) - 1.5;
        y[0] = 3.0 * rng.uniform(3 * i + 1) - 1.5;
        z[0] = 3.0 * rng.uniform(3 * i + 2) - 1.5;
        const double xz = quasipotential(ou, x, z, T_grid, 240, qo).value;
        const double xy = quasipotential(ou, x, y, T_grid, 240, qo).value;
        const double yz = quasipotential(ou, y, z, T_grid, 240, qo).value;
        CHECK(xz <= xy + yz + 3e-3);
    }
}

TEST_CASE("level sets") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec x0 = v2(1.5, 0.2);
    const auto flow = path_from_trajectory(integrate(model, x0, 5.0, 0.02));
    CHECK(level_set_member(model, flow, x0, 1e-6));
    CHECK(level_set_member(model, flow, x0, std::numeric_limits<double>::infinity()));

    const auto lif = lif_path(x0, v2(0, 0), 100);
    const double a = path_action(model, lif);
    CHECK_FALSE(level_set_member(model, lif, x0, a / 2.0));
    CHECK(level_set_member(model, lif, x0, a));

    CHECK_THROWS_AS(level_set_member(model, lif, v2(9, 9), 1.0), std::invalid_argument);
}

TEST_SUITE_END();
