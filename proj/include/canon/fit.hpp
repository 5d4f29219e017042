#pragma once

// Least-squares helpers for growth-exponent fitting.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace canon {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0; // standard error of the slope
    double rms = 0.0;      // root-mean-square residual
    std::size_t n = 0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("linear_fit: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    LinearFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.rms = std::sqrt(ss / static_cast<double>(n));
    f.slope_se = n > 2 ? std::sqrt(ss / static_cast<double>(n - 2) / sxx) : 0.0;
    return f;
}

struct MultiFit {
    std::vector<double> coef;
    std::vector<double> se;
    double rms = 0.0;
};

// y ~ X beta, X given column-wise. Column-pivoted QR; the columns used here
// (k log k, k, 1) are badly scaled, so each is normalized first.
inline MultiFit multi_fit(const std::vector<std::vector<double>>& columns, std::span<const double> y)
{
    const auto n = static_cast<Eigen::Index>(y.size());
    const auto p = static_cast<Eigen::Index>(columns.size());
    if (n <= p) throw std::invalid_argument("multi_fit: need more points than regressors");
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (columns[j].size() != y.size()) throw std::invalid_argument("multi_fit: size mismatch");
        double mx = 0;
        for (double v : columns[j]) mx = std::max(mx, std::abs(v));
        scale(j) = mx > 0 ? mx : 1.0;
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = columns[j][i] / scale(j);
    }
    const Eigen::Map<const Eigen::VectorXd> Y(y.data(), n);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p) throw std::invalid_argument("multi_fit: rank-deficient design");
    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd res = Y - X * beta;
    const double s2 = res.squaredNorm() / static_cast<double>(n - p);
    const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * s2;

    MultiFit f;
    f.rms = std::sqrt(res.squaredNorm() / static_cast<double>(n));
    for (Eigen::Index j = 0; j < p; ++j) {
        f.coef.push_back(beta(j) / scale(j));
        f.se.push_back(std::sqrt(std::max(0.0, cov(j, j))) / scale(j));
    }
    return f;
}

// decades * ppd points min * 10^(i/ppd), i = 0 .. n-1 (max itself excluded).
inline std::vector<double> geometric_grid(double min, double max, int ppd)
{
    if (!(min > 0.0) || !(max > min)) throw std::invalid_argument("geometric grid needs 0 < min < max");
    if (ppd < 1) throw std::invalid_argument("geometric grid needs a positive point density");
    const double decades = std::log10(max / min);
    const auto n = static_cast<std::size_t>(std::llround(decades * ppd));
    std::vector<double> g;
    g.reserve(n);
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 2); ++i)
        g.push_back(min * std::pow(10.0, static_cast<double>(i) / ppd));
    return g;
}

// count points from min to max inclusive, evenly spaced in log.
inline std::vector<double> geometric_points(double min, double max, std::size_t count)
{
    if (!(min > 0.0) || !(max >= min) || count < 1) throw std::invalid_argument("geometric_points: bad range");
    if (count == 1) return {min};
    std::vector<double> g(count);
    const double step = std::log(max / min) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) g[i] = min * std::exp(step * static_cast<double>(i));
    g.back() = max;
    return g;
}

} // namespace canon
