#pragma once

#include <cmath>
#include <span>

#include "vaereg/errors.hpp"
#include "vaereg/util.hpp"

namespace vaereg {

// Coefficient of determination: 1 - SS_res / SS_tot.
inline double r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.size() < 2)
        throw DataError("r2_score: need equal lengths >= 2");
    const double mean = mean_of(y_true);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double r = y_true[i] - y_pred[i];
        const double d = y_true[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (!(ss_tot > 0.0)) throw DataError("r2_score: zero-variance ground truth");
    return 1.0 - ss_res / ss_tot;
}

inline double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) throw DataError("rmse: need equal non-empty lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double r = y_true[i] - y_pred[i];
        s += r * r;
    }
    return std::sqrt(s / static_cast<double>(y_true.size()));
}

}  // namespace vaereg
