#pragma once

#include "entlink/devices.hpp"
#include "entlink/rng.hpp"
#include "entlink/states.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace entlink::channel {

enum class Source { bell, spdc };
enum class NonCoincidencePolicy { random_bit, drop_trial };

const char* to_string(Source source);
const char* to_string(NonCoincidencePolicy policy);

// Full description of a channel run.  Everything that affects the sampled
// numbers lives here; jobs only partitions the work and never changes any
// output.
struct RunConfig {
    Source source = Source::bell;
    devices::AmplifierModel amplifier;
    long trials = 10000;
    std::uint64_t seed = 0;
    long threshold = 0;  // 0 selects default_threshold(m)
    NonCoincidencePolicy policy = NonCoincidencePolicy::random_bit;
    int jobs = 1;
    int spdc_n_max = 2;

    long resolved_threshold() const;
};

struct TrialRecord {
    long trial_index = 0;
    int sent_bit = 0;
    states::EventClass event_class = states::EventClass::coincidence;
    devices::PhotonCounts counts;
    int readout_bit = 0;  // -1 when the trial was dropped
};

struct ChannelEstimate {
    long trials = 0;
    long retained = 0;  // trials contributing to the confusion matrix
    std::array<std::array<long, 2>, 2> confusion{};  // [sent][readout]
    double ber = 0.0;
    double ci_low = 0.0;   // Wilson 95% interval on the error rate
    double ci_high = 0.0;
    double mutual_information = 0.0;  // bits, Miller-Madow corrected estimate
    double capacity = 0.0;            // bits, of the empirical transition matrix
    double snr = 0.0;                 // design value (m+1)/sqrt(3m+1)
};

// One trial, fully determined by (config.seed, trial_index, sent_bit).
TrialRecord run_trial(const RunConfig& config, int sent_bit, long trial_index);

// Monte Carlo estimate over config.trials trials with uniform random sent
// bits, trial i on rng stream (config.seed, i).  Byte-identical results for
// any jobs value.  Optionally captures every trial record.
ChannelEstimate estimate_channel(const RunConfig& config,
                                 std::vector<TrialRecord>* per_trial = nullptr);

struct SweepPoint {
    long m = 0;
    double ber = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double ber_exact = 0.0;
    double snr = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    // Log-log slope of the design SNR against m (positive m values only).
    double snr_slope = 0.0;
};

// estimate_channel across amplifier sizes, with the threshold re-derived per
// point unless the base config pins one.
SweepResult sweep_m(const RunConfig& base, std::span<const long> m_values);

// Receiver-side statistics with the sender's analyzer fixed at each of the
// two encoding settings (marginalized over the sender's outcome).  If the
// marginals differ, the setting alone shifts receiver counts, i.e. the model
// signals without any classical channel.
struct NoSignalingReport {
    std::vector<std::pair<long, long>> support;  // (n_r, n_r_prime)
    std::vector<double> setting0_pmf;
    std::vector<double> setting1_pmf;
    double tv_distance = 0.0;
    double mi_upper = 0.0;  // bits per use against a uniform setting
    double leakage = 0.0;   // truncation loss of the covariant pmfs
};

// Exact setting marginals for the given amplifier against the ideal
// coincidence pair (sender outcomes weighted 1/2 each).
NoSignalingReport no_signaling_test(const devices::AmplifierModel& model);

// Monte Carlo cross-check of mi_upper: draw a uniform setting and one count
// sample per round, then estimate I(setting; n_r - n_r') with the
// Miller-Madow correction.  The difference statistic is what the receiver
// decodes from; binning by it keeps every cell well populated so the
// bias correction remains in its validity regime (roughly
// (bins - 1) / (samples * ln 4) before correction, second order after).
double mc_setting_mi(const devices::AmplifierModel& model, long samples,
                     std::uint64_t seed);

// I(X; Y) in bits from a 2x2 confusion table (rows: sent, columns: readout)
// and an input prior.  Rows are normalized internally; an all-zero row is
// DegenerateMatrix.
double mutual_information(const std::array<std::array<double, 2>, 2>& confusion,
                          const std::array<double, 2>& prior);

struct CapacityResult {
    double bits = 0.0;
    std::array<double, 2> prior{0.5, 0.5};
    int iterations = 0;
};

// Channel capacity of a binary-input transition matrix (rows must be pmfs;
// NonStochasticRows otherwise) by Blahut-Arimoto iteration.
CapacityResult capacity_blahut_arimoto(const std::array<std::array<double, 2>, 2>& transition,
                                       double tol_bits = 1e-12, int max_iterations = 10000);

// Exact probability that the bit-1 branch (every photon split 50/50 by the
// analyzer) reaches |n_r - n_r_prime| >= threshold: the two-sided tail of
// a symmetric binomial difference over 3m+1 photons.
double exact_signal1_error(long m, long threshold);

// Exact bit error rate of the configured channel, averaging the two bit
// branches and accounting for the source's non-coincidence policy.  Defined
// for the composition amplifiers (deterministic, urn); NaN for covariant.
double exact_ber(const RunConfig& config);

// Design signal-to-noise ratio (m+1)/sqrt(3m+1).
double snr_formula(long m);

}  // namespace entlink::channel
