#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "vaereg/errors.hpp"

namespace vaereg {

// Dense row-major array of doubles. Rank 1 (vectors) and rank 2
// (batch x dim matrices) cover everything in this library.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0) : shape_(std::move(shape)) {
        std::size_t n = 1;
        for (std::size_t s : shape_) {
            if (s == 0) throw DimensionError("tensor dimensions must be positive");
            n *= s;
        }
        if (shape_.empty()) n = 0;
        data_.assign(n, fill);
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
        return Tensor({rows, cols}, fill);
    }

    static Tensor vector(std::size_t n, double fill = 0.0) { return Tensor({n}, fill); }

    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = rows.begin()->size();
        Tensor t = matrix(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw DimensionError("ragged row list");
            for (double v : row) t.data_[i++] = v;
        }
        return t;
    }

    static Tensor from_vector(std::initializer_list<double> vals) {
        Tensor t = vector(vals.size());
        std::size_t i = 0;
        for (double v : vals) t.data_[i++] = v;
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t rows() const {
        if (rank() != 2) throw DimensionError("rows() requires a rank-2 tensor");
        return shape_[0];
    }
    std::size_t cols() const {
        if (rank() != 2) throw DimensionError("cols() requires a rank-2 tensor");
        return shape_[1];
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double* row_data(std::size_t r) { return data_.data() + r * shape_[1]; }
    const double* row_data(std::size_t r) const { return data_.data() + r * shape_[1]; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) {
        for (double& x : data_) x = v;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double squared_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return s;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline std::string shape_string(const Tensor& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.shape().size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(t.shape()[i]);
    }
    s += ")";
    return s;
}

}  // namespace vaereg
