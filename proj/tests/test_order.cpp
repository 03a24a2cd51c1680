#include <doctest.h>

#include "coopstab/order.hpp"
#include "coopstab/rng.hpp"

using namespace coopstab;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec random_vec(const RandomStream& rng, std::uint64_t base, int dim) {
    Vec v(dim);
    for (int d = 0; d < dim; ++d) v[d] = 4.0 * rng.uniform(base + d) - 2.0;
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("order");

TEST_CASE("componentwise comparisons") {
    CHECK(leq(v2(1, 2), v2(1, 3)));
    CHECK(leq(v2(1, 2), v2(1, 2)));
    CHECK_FALSE(leq(v2(2, 1), v2(1, 2)));

    CHECK(strictly_less(v2(1, 2), v2(1, 3)));
    CHECK_FALSE(strictly_less(v2(1, 2), v2(1, 2)));
    CHECK_FALSE(strongly_less(v2(1, 2), v2(1, 3)));
    CHECK(strongly_less(v2(0, 0), v2(1, 1)));

    CHECK_THROWS_AS(leq(v2(0, 0), Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("unordered sets") {
    CHECK(is_unordered_set({v2(0, 1), v2(1, 0)}));
    CHECK_FALSE(is_unordered_set({v2(0, 0), v2(1, 1)}));
    CHECK(is_unordered_set({v2(2, 3)}));
    CHECK_THROWS_AS(is_unordered_set({}), std::invalid_argument);
}

TEST_CASE("order intervals") {
    OrderInterval closed(v2(0, 0), v2(1, 1));
    CHECK(closed.contains(v2(0, 1)));
    OrderInterval open(v2(0, 0), v2(1, 1), true);
    CHECK_FALSE(open.contains(v2(0, 1)));
    CHECK(open.contains(v2(0.5, 0.5)));
    CHECK_THROWS_AS(OrderInterval(v2(0, 1), v2(1, 0)), std::invalid_argument);
    // open interval needs a strict gap in every component
    CHECK_THROWS_AS(OrderInterval(v2(0, 0), v2(1, 0), true), std::invalid_argument);
}

TEST_CASE("relation laws on random data") {
    RandomStream rng(2024, 0);
    for (int i = 0; i < 200; ++i) {
        const Vec x = random_vec(rng, 100 * i, 3);
        const Vec y = random_vec(rng, 100 * i + 10, 3);
        const Vec z = random_vec(rng, 100 * i + 20, 3);
        CHECK(leq(x, x));  // reflexive
        if (leq(x, y) && leq(y, x)) CHECK(x == y);  // antisymmetric at tol 0
        if (leq(x, y) && leq(y, z)) CHECK(leq(x, z));  // transitive
        if (strongly_less(x, y)) CHECK(strictly_less(x, y));
        if (strictly_less(x, y)) CHECK(leq(x, y));
    }
}

TEST_SUITE_END();
