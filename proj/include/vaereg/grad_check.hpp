#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vaereg/adam.hpp"
#include "vaereg/tensor.hpp"

namespace vaereg {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;

    bool within(double tolerance) const { return max_rel_error < tolerance; }
};

// Compares analytic gradients against central finite differences for every
// coordinate of every parameter. loss_fn must be deterministic given the
// current parameter values (fix all randomness before calling).
//
// Relative error uses an absolute floor so finite-difference roundoff on
// near-zero gradients does not register as disagreement.
template <class LossFn>
GradCheckReport grad_check(const std::vector<ParamRef>& params, const std::vector<Tensor>& analytic,
                           LossFn&& loss_fn, double h = 1e-5, double floor = 1e-4) {
    if (params.size() != analytic.size())
        throw DimensionError("grad_check: parameter/gradient counts disagree");
    GradCheckReport report;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& theta = *params[p].value;
        if (!analytic[p].same_shape(theta))
            throw DimensionError("grad_check: gradient shape mismatch for " + params[p].name);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + h;
            const double lp = loss_fn();
            theta[i] = saved - h;
            const double lm = loss_fn();
            theta[i] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double a = analytic[p][i];
            const double rel = std::abs(a - numeric) / std::max(floor, std::abs(a) + std::abs(numeric));
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = params[p].name;
                report.worst_index = i;
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace vaereg
