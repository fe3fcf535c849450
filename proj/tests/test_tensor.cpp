#include <catch2/catch.hpp>

#include "vaereg/rng.hpp"
#include "vaereg/tensor.hpp"

using namespace vaereg;

TEST_CASE("tensor shape bookkeeping") {
    Tensor t = Tensor::matrix(3, 4, 1.5);
    REQUIRE(t.size() == 12);
    REQUIRE(t.rows() == 3);
    REQUIRE(t.cols() == 4);
    t(2, 3) = -2.0;
    REQUIRE(t[11] == -2.0);
    REQUIRE(t.all_finite());

    Tensor v = Tensor::from_vector({1.0, 2.0, 3.0});
    REQUIRE(v.rank() == 1);
    REQUIRE(v.squared_norm() == Approx(14.0));

    REQUIRE_THROWS_AS(Tensor({3, 0}), DimensionError);
    REQUIRE_THROWS_AS(Tensor::from_rows({{1.0, 2.0}, {3.0}}), DimensionError);
}

TEST_CASE("tensor detects non-finite values") {
    Tensor t = Tensor::vector(3, 0.0);
    REQUIRE(t.all_finite());
    t[1] = std::numeric_limits<double>::infinity();
    REQUIRE_FALSE(t.all_finite());
}

TEST_CASE("rng streams are deterministic and mix differently") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 16; ++i) {
        const double av = a.uniform01();
        REQUIRE(av == b.uniform01());
        REQUIRE(av >= 0.0);
        REQUIRE(av < 1.0);
    }
    REQUIRE(Rng(42).next_u64() != c.next_u64());
    REQUIRE(mix_seed(1, 2) != mix_seed(2, 1));
    REQUIRE(mix_seed(1, 2, 3) != mix_seed(1, 2, 4));
}

TEST_CASE("rng normal has roughly standard moments") {
    Rng rng(7);
    const std::size_t n = 200000;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    REQUIRE(std::abs(mean) < 0.01);
    REQUIRE(var == Approx(1.0).margin(0.02));
}
