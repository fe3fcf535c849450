#include <catch2/catch.hpp>

#include "vaereg/grad_check.hpp"

using namespace vaereg;

TEST_CASE("grad_check on a quadratic loss") {
    Tensor theta = Tensor::vector(1, 3.0);
    std::vector<ParamRef> params{{"theta", &theta}};
    std::vector<Tensor> analytic{Tensor::vector(1, 3.0)};  // d/dtheta of theta^2 / 2
    auto loss = [&theta]() { return 0.5 * theta[0] * theta[0]; };
    const GradCheckReport report = grad_check(params, analytic, loss);
    REQUIRE(report.max_rel_error < 1e-6);
    REQUIRE(report.within(1e-4));
}

TEST_CASE("grad_check flags a corrupted gradient") {
    Tensor theta = Tensor::from_vector({0.5, -1.5});
    std::vector<ParamRef> params{{"theta", &theta}};
    std::vector<Tensor> analytic{Tensor::from_vector({0.5 + 0.1, -1.5})};  // +0.1 corruption
    auto loss = [&theta]() { return 0.5 * theta.squared_norm(); };
    const GradCheckReport report = grad_check(params, analytic, loss);
    REQUIRE(report.max_rel_error > 1e-4);
    REQUIRE_FALSE(report.within(1e-4));
    REQUIRE(report.worst_param == "theta");
    REQUIRE(report.worst_index == 0);
}
