#include <doctest.h>

#include <cmath>

#include "coopstab/flow.hpp"
#include "coopstab/measure.hpp"

using namespace coopstab;

namespace {

GriffithParams gp(std::vector<double> alphas, double m, double c = 1.0) {
    GriffithParams p;
    p.alphas = std::move(alphas);
    p.m = m;
    p.sigma = {DiffusionSpec::Kind::Const, c};
    return p;
}

HistogramGrid square_grid(double half_width, int bins, int dim = 2) {
    HistogramGrid g;
    g.lo = Vec::Constant(dim, -half_width);
    g.hi = Vec::Constant(dim, half_width);
    g.bins.assign(dim, bins);
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("measure");

TEST_CASE("histogram grid indexing") {
    const auto g = square_grid(2.0, 4);
    CHECK(g.cells() == 16);
    Vec inside(2);
    inside << -1.9, 1.9;
    REQUIRE(g.locate(inside));
    CHECK((g.center(*g.locate(inside)) - inside).lpNorm<Eigen::Infinity>() < 0.5);
    Vec outside(2);
    outside << 2.5, 0.0;
    CHECK_FALSE(g.locate(outside));
}

TEST_CASE("scalar OU occupation statistics") {
    const auto ou = ou_model(1.0);
    HistogramGrid g;
    g.lo = Vec::Constant(1, -1.0);
    g.hi = Vec::Constant(1, 1.0);
    g.bins = {400};
    const double eps = 0.2;
    const auto est = estimate_stationary(ou, Vec::Zero(1), eps, 3000.0, 1e-3, 8, g,
                                         {Vec::Zero(1)});
    CHECK(est.valid);
    double sum = 0.0;
    for (double w : est.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.second_moment() == doctest::Approx(eps * eps / 2.0).epsilon(0.10));
}

TEST_CASE("ball masses are monotone in the radius") {
    const auto model = griffith_model(gp({0.5, 1.0}, 1.0, 0.25));
    const Vec center = griffith_ray(*model.griffith);
    const auto g = square_grid(3.0, 30);
    double prev = -1.0;
    for (double radius : {0.1, 0.2, 0.4}) {
        StationaryOptions so;
        so.ball_radius = radius;
        const auto est =
            estimate_stationary(model, center, 0.1, 50.0, 1e-3, 21, g, {center}, so);
        CHECK(est.ball_masses[0] >= prev);
        prev = est.ball_masses[0];
    }
    CHECK(prev > 0.9);
}

TEST_CASE("zero noise parks all mass at the attractor") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec sink = 2.0 * griffith_ray(*model.griffith);
    const auto g = square_grid(4.0, 40);
    const auto est = estimate_stationary(model, Vec(1.2 * griffith_ray(*model.griffith)), 0.0,
                                         100.0, 1e-3, 3, g, {sink});
    CHECK(est.valid);
    CHECK(est.ball_masses[0] > 0.9);
}

TEST_CASE("blow-up flags the estimate invalid") {
    const auto bad = ou_model(-6.0, 1);
    HistogramGrid g;
    g.lo = Vec::Constant(1, -10.0);
    g.hi = Vec::Constant(1, 10.0);
    g.bins = {10};
    const auto est = estimate_stationary(bad, Vec::Ones(1), 0.0, 50.0, 1e-2, 5, g, {});
    CHECK_FALSE(est.valid);
    CHECK(est.flag == "blow-up");
}

TEST_CASE("classification table") {
    const auto a = table1_predict(1.0, 1.2);
    CHECK(a.regime == "origin");
    CHECK(a.ray_roots.empty());

    const auto b = table1_predict(1.0, 0.5);
    CHECK(b.regime == "symmetric-pair");
    REQUIRE(b.ray_roots.size() == 1);
    CHECK(b.ray_roots[0] == doctest::Approx(1.0));
    CHECK_FALSE(b.origin);

    const auto c = table1_predict(2.0, 0.4);
    CHECK(c.regime == "origin-and-symmetric-pair");
    REQUIRE(c.ray_roots.size() == 1);
    CHECK(c.ray_roots[0] == doctest::Approx(2.0));
    CHECK(c.origin);

    CHECK(table1_predict(2.0, 0.5).regime == "origin");
    CHECK(table1_predict(2.0, 0.5).marginal);
}

TEST_CASE("predicted support equals the spectral stable set off boundaries") {
    for (auto [m, phi] : std::vector<std::pair<double, double>>{{1.0, 1.3},
                                                                {1.0, 0.6},
                                                                {2.0, 0.7},
                                                                {2.0, 0.35},
                                                                {4.0, 0.3},
                                                                {3.0, 0.9}}) {
        const auto p = gp({phi, 1.0}, m);
        const auto cls = classify_griffith(p);
        const auto predicted = table1_predict(m, phi).support_points(p);
        const auto stable = cls.stable_set();
        REQUIRE(predicted.size() == stable.size());
        for (const auto& q : predicted) {
            bool found = false;
            for (const auto& s : stable)
                if ((q - s).lpNorm<Eigen::Infinity>() < 1e-9) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("well masses are symmetric under a mixing noise") {
    // strong noise hops between the two wells; both runs of a +-symmetric
    // initial ensemble must agree within Monte-Carlo error
    const auto model = griffith_model(gp({0.5, 1.0}, 1.0));
    const Vec e = griffith_ray(*model.griffith);
    const auto g = square_grid(4.0, 20);
    StationaryOptions so;
    so.ball_radius = 0.6;
    const int reps = 6;
    double plus = 0.0, minus = 0.0;
    std::vector<double> diffs;
    for (int k = 0; k < reps; ++k) {
        const Vec start = k % 2 == 0 ? e : Vec(-e);
        const auto est = estimate_stationary(model, start, 0.6, 800.0, 1e-3, 100 + k, g,
                                             {e, Vec(-e)}, so);
        plus += est.ball_masses[0];
        minus += est.ball_masses[1];
        diffs.push_back(est.ball_masses[0] - est.ball_masses[1]);
    }
    plus /= reps;
    minus /= reps;
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= reps;
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    const double se = std::sqrt(var / (reps - 1) / reps);
    CHECK(std::abs(plus - minus) < 3.0 * se + 0.02);
}

TEST_CASE("single-entry sweep reduces to one estimate") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0, 0.25));
    SweepOptions so;
    so.t_min = 30.0;
    so.t_cap = 30.0;
    const auto rep = concentration_sweep(model, {0.1}, 12, so);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].valid);
    CHECK(rep.monotone);
    CHECK(rep.agrees_with_classification);
    CHECK(rep.rows[0].stable_mass + rep.rows[0].unstable_mass + rep.rows[0].leftover ==
          doctest::Approx(1.0));
}

TEST_CASE("concentration strengthens as the noise fades") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0, 0.25));
    SweepOptions so;
    so.t_scale = 0.25;
    so.t_min = 150.0;  // long enough that the transient does not dominate
    so.t_cap = 150.0;
    so.threads = 2;
    const auto rep = concentration_sweep(model, {0.4, 0.1}, 9, so);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.monotone);
    CHECK(rep.rows[1].stable_mass > rep.rows[0].stable_mass - 0.05);
    CHECK(rep.rows[1].stable_mass > 0.9);
    CHECK(rep.rows[1].unstable_mass < 0.05);
}

TEST_SUITE_END();
