#include "csbp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csbp {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 32) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleSummary summarize(std::span<const double> values) {
    SampleSummary s;
    s.n = values.size();
    if (s.n == 0) return s;
    s.mean = pairwise_sum(values) / static_cast<double>(s.n);
    if (s.n < 2) return s;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - s.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(s.n - 1);
    s.stderr_ = std::sqrt(var / static_cast<double>(s.n));
    return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_normal(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("ks_normal: empty sample");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = normal_cdf(values[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

LinearFit3 weighted_least_squares(std::span<const double> x1, std::span<const double> x2,
                                  std::span<const double> y, std::span<const double> w) {
    const std::size_t n = y.size();
    if (x1.size() != n || x2.size() != n || w.size() != n || n < 3)
        throw std::invalid_argument("weighted_least_squares: need >= 3 consistent points");

    // Normal equations for regressors (x1, x2, 1).
    double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double rhs[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double r[3] = {x1[i], x2[i], 1.0};
        for (int p = 0; p < 3; ++p) {
            rhs[p] += w[i] * r[p] * y[i];
            for (int q = 0; q < 3; ++q) a[p][q] += w[i] * r[p] * r[q];
        }
    }

    // Gaussian elimination with partial pivoting.
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[idx[r]][col]) > std::abs(a[idx[piv]][col])) piv = r;
        std::swap(idx[col], idx[piv]);
        const double diag = a[idx[col]][col];
        if (std::abs(diag) < 1e-300)
            throw std::runtime_error("weighted_least_squares: singular design");
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[idx[r]][col] / diag;
            for (int c = col; c < 3; ++c) a[idx[r]][c] -= f * a[idx[col]][c];
            rhs[idx[r]] -= f * rhs[idx[col]];
        }
    }
    double beta[3];
    for (int col = 2; col >= 0; --col) {
        double s = rhs[idx[col]];
        for (int c = col + 1; c < 3; ++c) s -= a[idx[col]][c] * beta[c];
        beta[col] = s / a[idx[col]][col];
    }

    LinearFit3 fit;
    fit.b1 = beta[0];
    fit.b2 = beta[1];
    fit.intercept = beta[2];

    double wsum = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wsum += w[i];
        ybar += w[i] * y[i];
    }
    ybar /= wsum;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = fit.b1 * x1[i] + fit.b2 * x2[i] + fit.intercept;
        ss_res += w[i] * (y[i] - pred) * (y[i] - pred);
        ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n || n < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

} // namespace csbp
