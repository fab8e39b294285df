#pragma once

#include <span>
#include <vector>

namespace entlink::stats {

double log_binomial(long n, long k);

// P(X = k) for X ~ Binomial(n, p), computed in log space.
double binomial_pmf(long n, long k, double p);

// P(|2B - n| >= t) for B ~ Binomial(n, 1/2): the two-sided tail of the
// difference between the two halves of n fair coin flips.
double symmetric_difference_tail(long n, long t);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

// Wilson score interval for a binomial proportion.  The default z is the
// two-sided 95% normal quantile.
Interval wilson_interval(long successes, long trials, double z = 1.959963984540054);

// Shannon entropy in bits of an unnormalized distribution (normalized first;
// zero weights contribute nothing).
double entropy_bits(std::span<const double> weights);

double binary_entropy_bits(double p);

// (1/2) * sum |p_i - q_i| over aligned supports.
double total_variation(std::span<const double> p, std::span<const double> q);

// Jensen-Shannon divergence in bits between aligned distributions; equals the
// mutual information between a fair binary selector and the drawn symbol.
double jensen_shannon_bits(std::span<const double> p, std::span<const double> q);

// Plug-in mutual information in bits of a joint count (or weight) table.
double mi_plugin_bits(const std::vector<std::vector<double>>& joint);

// Plug-in MI with the Miller-Madow bias correction, clamped at zero.
double mi_miller_madow_bits(const std::vector<std::vector<long>>& counts);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace entlink::stats
