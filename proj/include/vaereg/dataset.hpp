#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vaereg/errors.hpp"
#include "vaereg/tensor.hpp"

namespace vaereg {

enum class Provenance { synthetic, csv };

// Per-feature and target location/scale, always fit on training rows only.
// Uses the population (1/n) standard deviation.
struct Standardization {
    std::vector<double> feature_mean;
    std::vector<double> feature_std;
    double target_mean = 0.0;
    double target_std = 1.0;

    static Standardization fit(const Tensor& x, std::span<const double> c,
                               const std::vector<std::string>& names = {}) {
        std::vector<std::size_t> rows(x.rows());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        return fit_rows(x, c, rows, names);
    }

    static Standardization fit_rows(const Tensor& x, std::span<const double> c,
                                    const std::vector<std::size_t>& rows,
                                    const std::vector<std::string>& names = {}) {
        if (rows.size() < 2) throw DataError("standardization needs at least 2 rows");
        const std::size_t d = x.cols();
        Standardization s;
        s.feature_mean.assign(d, 0.0);
        s.feature_std.assign(d, 0.0);
        const double inv_n = 1.0 / static_cast<double>(rows.size());
        for (std::size_t r : rows) {
            const double* row = x.row_data(r);
            for (std::size_t j = 0; j < d; ++j) s.feature_mean[j] += row[j];
            s.target_mean += c[r];
        }
        for (std::size_t j = 0; j < d; ++j) s.feature_mean[j] *= inv_n;
        s.target_mean *= inv_n;
        double tvar = 0.0;
        for (std::size_t r : rows) {
            const double* row = x.row_data(r);
            for (std::size_t j = 0; j < d; ++j) {
                const double dv = row[j] - s.feature_mean[j];
                s.feature_std[j] += dv * dv;
            }
            const double dt = c[r] - s.target_mean;
            tvar += dt * dt;
        }
        for (std::size_t j = 0; j < d; ++j) {
            s.feature_std[j] = std::sqrt(s.feature_std[j] * inv_n);
            if (!(s.feature_std[j] > 0.0)) {
                const std::string col = j < names.size() ? "'" + names[j] + "'" : std::to_string(j);
                throw DataError("constant feature column " + col + " cannot be standardized");
            }
        }
        s.target_std = std::sqrt(tvar * inv_n);
        if (!(s.target_std > 0.0)) throw DataError("target column has zero variance");
        return s;
    }

    Tensor apply(const Tensor& x) const {
        if (x.cols() != feature_mean.size())
            throw DimensionError("standardization: feature count mismatch");
        Tensor out = x;
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double* row = out.row_data(r);
            for (std::size_t j = 0; j < feature_mean.size(); ++j)
                row[j] = (row[j] - feature_mean[j]) / feature_std[j];
        }
        return out;
    }

    std::vector<double> apply_target(std::span<const double> c) const {
        std::vector<double> out(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) out[i] = (c[i] - target_mean) / target_std;
        return out;
    }

    double standardize_target(double c) const { return (c - target_mean) / target_std; }
    double destandardize_target(double c_std) const { return c_std * target_std + target_mean; }

    std::vector<double> destandardize_features(std::span<const double> row_std) const {
        std::vector<double> out(row_std.size());
        for (std::size_t j = 0; j < row_std.size(); ++j)
            out[j] = row_std[j] * feature_std[j] + feature_mean[j];
        return out;
    }
};

// Feature matrix plus scalar targets; the universal training input.
struct Dataset {
    Tensor X;                // n x D
    std::vector<double> c;   // n
    std::vector<std::string> feature_names;
    std::string target_name = "target";
    Provenance provenance = Provenance::csv;
    std::optional<Standardization> standardization;

    std::size_t n() const { return X.rank() == 2 ? X.rows() : 0; }
    std::size_t dims() const { return X.rank() == 2 ? X.cols() : 0; }

    void validate() const {
        if (n() < 2) throw DataError("dataset needs at least 2 rows");
        if (feature_names.size() != dims()) throw DataError("dataset: feature name count mismatch");
        if (c.size() != n()) throw DataError("dataset: target count mismatch");
        if (!X.all_finite()) throw DataError("dataset: non-finite feature value");
        for (double v : c)
            if (!std::isfinite(v)) throw DataError("dataset: non-finite target value");
    }
};

// Fits statistics on the dataset itself and returns the transformed copy
// (training use; cross-validation fits statistics per fold instead).
inline Dataset standardize(const Dataset& d) {
    Dataset out = d;
    Standardization s = Standardization::fit(d.X, d.c, d.feature_names);
    out.X = s.apply(d.X);
    out.c = s.apply_target(d.c);
    out.standardization = s;
    return out;
}

}  // namespace vaereg
