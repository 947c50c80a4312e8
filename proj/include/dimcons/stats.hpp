#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dimcons {

/// Neumaier-compensated sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Mean and standard error over independent observations. Merging is
/// associative so per-thread accumulators can be combined in trial order.
class MeanAccumulator {
public:
    void add(double x) noexcept {
        ++n_;
        sum_.add(x);
        sumsq_.add(x * x);
    }
    void merge(const MeanAccumulator& o) noexcept {
        n_ += o.n_;
        sum_.add(o.sum_.value());
        sumsq_.add(o.sumsq_.value());
    }
    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }
    double variance() const noexcept {
        if (n_ < 2) return 0.0;
        const double m = mean();
        const double v = (sumsq_.value() - static_cast<double>(n_) * m * m) / static_cast<double>(n_ - 1);
        return v > 0.0 ? v : 0.0;
    }
    double stderr_of_mean() const noexcept { return n_ ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::size_t n_ = 0;
    CompensatedSum sum_;
    CompensatedSum sumsq_;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

/// Weighted least squares y ~ slope * x + intercept. Unit weights when `w` is empty.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w = {}) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs >= 2 points");
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
        sxx += wi * x[i] * x[i];
        sxy += wi * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / sw;
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        rss += wi * r * r;
    }
    f.rms_residual = std::sqrt(rss / sw);
    return f;
}

/// Ordinary least squares with an arbitrary design matrix (rows = observations).
/// Solved through the normal equations; fine for the handful of columns used here.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& rows, std::span<const double> y) {
    const std::size_t p = rows.at(0).size();
    std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) a[i][j] += rows[r][i] * rows[r][j];
            a[i][p] += rows[r][i] * y[r];
        }
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        if (a[c][c] == 0.0) throw std::invalid_argument("least_squares: singular design");
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
        }
    }
    std::vector<double> beta(p);
    for (std::size_t i = 0; i < p; ++i) beta[i] = a[i][p] / a[i][i];
    return beta;
}

inline double log_sum_exp(double a, double b) noexcept {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

} // namespace dimcons
