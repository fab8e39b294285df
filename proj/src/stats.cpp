#include "entlink/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace entlink::stats {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

double log_binomial(long n, long k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

double binomial_pmf(long n, long k, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double log_pmf = log_binomial(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
    return std::exp(log_pmf);
}

double symmetric_difference_tail(long n, long t) {
    if (n < 0) throw std::invalid_argument("symmetric_difference_tail: negative n");
    if (t <= 0) return 1.0;
    const double log_half_n = -static_cast<double>(n) * std::log(2.0);
    double tail = 0.0;
    for (long k = 0; k <= n; ++k) {
        if (std::labs(2 * k - n) >= t) {
            tail += std::exp(log_binomial(n, k) + log_half_n);
        }
    }
    return std::min(tail, 1.0);
}

Interval wilson_interval(long successes, long trials, double z) {
    if (trials <= 0) throw std::invalid_argument("wilson_interval: no trials");
    if (successes < 0 || successes > trials) {
        throw std::invalid_argument("wilson_interval: successes outside [0, trials]");
    }
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double entropy_bits(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("entropy_bits: negative weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("entropy_bits: weights sum to zero");
    double h = 0.0;
    for (double w : weights) {
        if (w > 0.0) {
            const double p = w / total;
            h -= p * std::log(p);
        }
    }
    return h / kLn2;
}

double binary_entropy_bits(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy_bits: p outside [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p)) / kLn2;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("total_variation: supports differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sum += std::abs(p[i] - q[i]);
    }
    return 0.5 * sum;
}

double jensen_shannon_bits(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("jensen_shannon_bits: supports differ");
    double js = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) js += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) js += 0.5 * q[i] * std::log(q[i] / m);
    }
    return std::max(0.0, js / kLn2);
}

double mi_plugin_bits(const std::vector<std::vector<double>>& joint) {
    if (joint.empty()) throw std::invalid_argument("mi_plugin_bits: empty table");
    const std::size_t cols = joint.front().size();
    double total = 0.0;
    std::vector<double> row_sum(joint.size(), 0.0);
    std::vector<double> col_sum(cols, 0.0);
    for (std::size_t r = 0; r < joint.size(); ++r) {
        if (joint[r].size() != cols) throw std::invalid_argument("mi_plugin_bits: ragged table");
        for (std::size_t c = 0; c < cols; ++c) {
            const double w = joint[r][c];
            if (w < 0.0) throw std::invalid_argument("mi_plugin_bits: negative weight");
            row_sum[r] += w;
            col_sum[c] += w;
            total += w;
        }
    }
    if (!(total > 0.0)) throw std::invalid_argument("mi_plugin_bits: table sums to zero");
    double mi = 0.0;
    for (std::size_t r = 0; r < joint.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double w = joint[r][c];
            if (w > 0.0) {
                mi += (w / total) * std::log(w * total / (row_sum[r] * col_sum[c]));
            }
        }
    }
    return std::max(0.0, mi / kLn2);
}

double mi_miller_madow_bits(const std::vector<std::vector<long>>& counts) {
    if (counts.empty()) throw std::invalid_argument("mi_miller_madow_bits: empty table");
    const std::size_t cols = counts.front().size();
    std::vector<std::vector<double>> joint(counts.size(), std::vector<double>(cols, 0.0));
    long total = 0;
    std::vector<long> row_sum(counts.size(), 0);
    std::vector<long> col_sum(cols, 0);
    long occupied_cells = 0;
    for (std::size_t r = 0; r < counts.size(); ++r) {
        if (counts[r].size() != cols) {
            throw std::invalid_argument("mi_miller_madow_bits: ragged table");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const long k = counts[r][c];
            if (k < 0) throw std::invalid_argument("mi_miller_madow_bits: negative count");
            joint[r][c] = static_cast<double>(k);
            row_sum[r] += k;
            col_sum[c] += k;
            total += k;
            if (k > 0) ++occupied_cells;
        }
    }
    if (total <= 0) throw std::invalid_argument("mi_miller_madow_bits: table sums to zero");
    long occupied_rows = 0;
    long occupied_cols = 0;
    for (long s : row_sum) occupied_rows += (s > 0) ? 1 : 0;
    for (long s : col_sum) occupied_cols += (s > 0) ? 1 : 0;
    // H_MM = H_plugin + (K - 1) / (2N ln 2); combine the three entropy
    // corrections for I = H(X) + H(Y) - H(X, Y).
    const double correction = (static_cast<double>(occupied_rows - 1) +
                               static_cast<double>(occupied_cols - 1) -
                               static_cast<double>(occupied_cells - 1)) /
                              (2.0 * static_cast<double>(total) * kLn2);
    // The correction can overshoot on near-deterministic tables; information
    // can never exceed either marginal entropy, so clamp to the plug-in
    // marginals (and to zero from below).
    const double inv_total = 1.0 / static_cast<double>(total);
    double h_rows = 0.0, h_cols = 0.0;
    for (long s : row_sum) {
        if (s > 0) h_rows -= s * inv_total * std::log2(s * inv_total);
    }
    for (long s : col_sum) {
        if (s > 0) h_cols -= s * inv_total * std::log2(s * inv_total);
    }
    const double mi = mi_plugin_bits(joint) + correction;
    return std::max(0.0, std::min({mi, h_rows, h_cols}));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_line: need at least two aligned points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

}  // namespace entlink::stats
