#include <algorithm>

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace fisherdet;

TEST_CASE("tensor shape and element count") {
    Tensor t = Tensor::zeros({3, 4});
    CHECK(t.size() == 12);
    CHECK(t.data.size() == 12);
    CHECK(Tensor::element_count({2, 3, 5}) == 30);
    CHECK(Tensor::element_count({}) == 1); // rank-0 scalar convention

    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
    CHECK_THROWS_AS(Tensor::zeros({0, 3}), ShapeError);
}

TEST_CASE("tensor finiteness guards") {
    Tensor t({2}, {1.0, 2.0});
    CHECK(t.all_finite());
    CHECK_NOTHROW(t.require_finite("probe"));
    t.data[1] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.all_finite());
    CHECK_THROWS_AS(t.require_finite("probe"), NumericError);
    t.data[1] = std::nan("");
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("dot and norm") {
    ParamVector a = {1.0, 2.0, 3.0};
    ParamVector b = {4.0, -5.0, 6.0};
    CHECK(dot(a, b) == 12.0);
    CHECK(norm2({3.0, 4.0}) == 5.0);
    CHECK(norm2({}) == 0.0);
}

TEST_CASE("rng streams are deterministic") {
    Rng a(42), b(42), c(43);
    bool same = true, differ = false;
    for (int i = 0; i < 100; ++i) {
        double x = a.uniform(), y = b.uniform(), z = c.uniform();
        same = same && (x == y);
        differ = differ || (x != z);
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("rng normal moments are sane") {
    Rng r(7);
    const int n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = r.normal();
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("substream derivation separates salts") {
    auto s1 = Rng::substream(99, 0);
    auto s2 = Rng::substream(99, 1);
    auto s1b = Rng::substream(99, 0);
    CHECK(s1 == s1b);
    CHECK(s1 != s2);
    Rng a(s1), b(s2);
    CHECK(a.uniform() != b.uniform());
}

TEST_CASE("shuffle is a permutation and seed-stable") {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    std::vector<int> w = v;

    Rng r1(5);
    shuffle(v, r1);
    Rng r2(5);
    shuffle(w, r2);
    CHECK(v == w);

    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);

    std::vector<int> u(50);
    for (int i = 0; i < 50; ++i) u[i] = i;
    Rng r3(6);
    shuffle(u, r3);
    CHECK(u != v);
}

TEST_CASE("below stays in range") {
    Rng r(11);
    for (int i = 0; i < 1000; ++i) {
        auto k = r.below(7);
        CHECK(k < 7);
    }
}
