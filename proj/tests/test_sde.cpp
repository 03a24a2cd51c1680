#include <doctest.h>

#include <cmath>

#include "coopstab/flow.hpp"
#include "coopstab/sde.hpp"

using namespace coopstab;

namespace {

GriffithParams gp(std::vector<double> alphas, double m, double c = 1.0) {
    GriffithParams p;
    p.alphas = std::move(alphas);
    p.m = m;
    p.sigma = {DiffusionSpec::Kind::Const, c};
    return p;
}

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("sde");

TEST_CASE("single step") {
    const auto ou = ou_model(1.0, 2);
    const Vec x = v2(1.0, -2.0);

    const Vec det = em_step(ou, x, 0.0, 0.1, Vec::Zero(2));
    CHECK((det - (x + 0.1 * ou.drift(x))).lpNorm<Eigen::Infinity>() == 0.0);

    Model noise_only;
    noise_only.dim = 2;
    noise_only.drift = [](const Vec& v) { return Vec(Vec::Zero(v.size())); };
    noise_only.jacobian = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
    noise_only.sigma = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
    noise_only.sigma_constant = true;
    const Vec w = v2(0.3, -0.1);
    CHECK((em_step(noise_only, Vec::Zero(2), 1.0, 0.1, w) - w).lpNorm<Eigen::Infinity>() == 0.0);

    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec e = 2.0 * griffith_ray(*model.griffith);
    CHECK((em_step(model, e, 0.0, 0.1, Vec::Zero(2)) - e).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("noise-free simulation tracks the flow at first order") {
    const auto ou = ou_model(1.0);
    const auto run = simulate(ou, Vec::Ones(1), 0.0, 1.0, 1e-3, 42);
    CHECK(run.trajectory.final_state()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-2));

    // Euler error shrinks linearly under step refinement
    auto terminal = [&](double step) {
        return simulate(ou, Vec::Ones(1), 0.0, 1.0, step, 1).trajectory.final_state()[0];
    };
    const double rk = integrate(ou, Vec::Ones(1), 1.0, 1e-4).final_state()[0];
    const double coarse = std::abs(terminal(1e-2) - rk);
    const double fine = std::abs(terminal(1e-3) - rk);
    CHECK(coarse / fine == doctest::Approx(10.0).epsilon(0.25));
}

TEST_CASE("determinism contract") {
    const auto model = griffith_model(gp({0.5, 1.0}, 1.0));
    const auto a = simulate(model, v2(1, 1), 0.2, 2.0, 1e-3, 1234);
    const auto b = simulate(model, v2(1, 1), 0.2, 2.0, 1e-3, 1234);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i)
        CHECK(a.trajectory.states[i] == b.trajectory.states[i]);

    const auto c = simulate(model, v2(1, 1), 0.2, 2.0, 1e-3, 1235);
    CHECK(a.trajectory.final_state() != c.trajectory.final_state());
}

TEST_CASE("long-run second moment of the scalar OU") {
    const auto ou = ou_model(1.0);
    const double eps = 0.2;
    const double T = 4000.0, step = 1e-3;
    const int batches = 20;
    std::vector<double> batch_mean(batches, 0.0);
    std::vector<long> batch_n(batches, 0);
    sde_walk(ou, Vec::Zero(1), eps, T, step, 99, 0, [&](double t, const Vec& x) {
        if (t < 100.0) return;  // burn-in
        const int b = std::min(batches - 1, static_cast<int>((t - 100.0) / ((T - 100.0) / batches)));
        batch_mean[b] += x[0] * x[0];
        ++batch_n[b];
    });
    double mean = 0.0;
    for (int b = 0; b < batches; ++b) {
        batch_mean[b] /= batch_n[b];
        mean += batch_mean[b];
    }
    mean /= batches;
    double var = 0.0;
    for (int b = 0; b < batches; ++b) var += (batch_mean[b] - mean) * (batch_mean[b] - mean);
    const double se = std::sqrt(var / (batches - 1) / batches);
    CHECK(std::abs(mean - eps * eps / 2.0) < 3.0 * se + 1e-4);
}

TEST_CASE("ensembles are schedule independent") {
    const auto model = griffith_model(gp({0.5, 1.0}, 1.0));
    EnsembleOptions one;
    one.threads = 1;
    EnsembleOptions two;
    two.threads = 2;
    const auto runs1 = ensemble(model, v2(1, 1), 0.1, 1.0, 1e-2, 16, 7, one);
    const auto runs2 = ensemble(model, v2(1, 1), 0.1, 1.0, 1e-2, 16, 7, two);
    REQUIRE(runs1.size() == runs2.size());
    for (std::size_t i = 0; i < runs1.size(); ++i)
        CHECK(runs1[i].trajectory.final_state() == runs2[i].trajectory.final_state());

    // a single-member ensemble is exactly simulate on stream 0
    const auto solo = ensemble(model, v2(1, 1), 0.1, 1.0, 1e-2, 1, 7, one);
    const auto direct = simulate(model, v2(1, 1), 0.1, 1.0, 1e-2, 7);
    CHECK(solo[0].trajectory.final_state() == direct.trajectory.final_state());
}

TEST_CASE("ensemble mean decays like the flow") {
    const auto ou = ou_model(1.0);
    const int n = 10000;
    const double T = 1.0, step = 1e-2, eps = 0.1;
    const auto runs = ensemble(ou, Vec::Ones(1), eps, T, step, n, 31, {.threads = 2});
    double mean = 0.0, sq = 0.0;
    for (const auto& run : runs) {
        mean += run.trajectory.final_state()[0];
        sq += run.trajectory.final_state()[0] * run.trajectory.final_state()[0];
    }
    mean /= n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - std::exp(-T)) < 3.0 * se + 5e-3);
}

TEST_CASE("per-path blow-ups are recorded, not fatal") {
    const auto bad = ou_model(-6.0);
    const auto runs = ensemble(bad, Vec::Ones(1), 0.0, 10.0, 1e-2, 3, 5);
    for (const auto& run : runs) CHECK(run.blown_up);
    CHECK_THROWS_AS(simulate(bad, Vec::Ones(1), 0.0, 10.0, 1e-2, 5), BlowupError);
}

TEST_CASE("small noise paths hug the flow") {
    const auto model = griffith_model(gp({0.4, 1.0}, 2.0));
    const Vec x0 = v2(1, 1);
    const double T = 10.0, step = 1e-3, eps = 1e-3;
    const auto flow = integrate(model, x0, T, step);
    const int n = 60;
    int ok = 0;
    for (int i = 0; i < n; ++i) {
        double sup = 0.0;
        std::size_t k = 0;
        sde_walk(model, x0, eps, T, step, 77, i, [&](double, const Vec& x) {
            if (k < flow.states.size())
                sup = std::max(sup, (x - flow.states[k]).lpNorm<Eigen::Infinity>());
            ++k;
        });
        if (sup < 0.05) ++ok;
    }
    CHECK(ok >= static_cast<int>(0.95 * n));
}

TEST_SUITE_END();
