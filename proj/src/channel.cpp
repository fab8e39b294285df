#include "entlink/channel.hpp"

#include "entlink/errors.hpp"
#include "entlink/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>

namespace entlink::channel {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Remote-photon angles that occur in the protocol; their count pmfs are
// precomputed once per run.
constexpr std::array<double, 4> kProtocolAngles = {0.0, 90.0, 45.0, 135.0};

double angular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), 180.0);
    return std::min(d, 180.0 - d);
}

struct TrialEngine {
    RunConfig cfg;
    long threshold;
    states::PairState pair;
    std::optional<devices::CovariantAmplifier> cov;
    struct AngleSlot {
        double angle_deg = 0.0;
        fock::CountDistribution pmf;
        std::optional<rng::CdfSampler> sampler;
    };
    std::array<AngleSlot, 4> slots;

    explicit TrialEngine(const RunConfig& config)
        : cfg(config),
          threshold(config.resolved_threshold()),
          pair(config.source == Source::bell
                   ? states::PairState::bell_pair()
                   : states::PairState::spdc_pair(config.spdc_n_max)) {
        if (cfg.trials < 0) throw std::invalid_argument("estimate_channel: negative trials");
        if (cfg.amplifier.kind == devices::AmplifierKind::covariant) {
            cov.emplace(cfg.amplifier);
            for (std::size_t i = 0; i < kProtocolAngles.size(); ++i) {
                slots[i].angle_deg = kProtocolAngles[i];
                slots[i].pmf = cov->count_pmf(
                    states::Polarization::linear(kProtocolAngles[i]), 0.0);
                slots[i].sampler.emplace(slots[i].pmf.probabilities);
            }
        }
    }

    devices::PhotonCounts covariant_counts(const states::Polarization& remote,
                                           rng::Stream& stream) const {
        if (remote.is_linear()) {
            const double angle = remote.angle_deg();
            for (const auto& slot : slots) {
                if (slot.sampler && angular_distance(angle, slot.angle_deg) < 1e-6) {
                    const std::size_t i = slot.sampler->sample(stream);
                    return {slot.pmf.support[i][0], slot.pmf.support[i][1]};
                }
            }
        }
        const auto pmf = cov->count_pmf(remote.density(), 0.0);
        return devices::detect_counts(pmf, stream);
    }

    TrialRecord run(long index, int forced_bit) const {
        TrialRecord rec;
        rec.trial_index = index;
        rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(index));
        rec.sent_bit = forced_bit >= 0 ? (forced_bit & 1) : stream.bit();

        const auto enc = devices::encode({rec.sent_bit}, pair, stream);
        if (const auto* missed = std::get_if<devices::NonCoincidenceEvent>(&enc)) {
            rec.event_class = missed->event;
            rec.counts = {};
            rec.readout_bit =
                cfg.policy == NonCoincidencePolicy::random_bit ? stream.bit() : -1;
            return rec;
        }

        rec.event_class = states::EventClass::coincidence;
        const auto& outcome = std::get<states::MeasurementOutcome>(enc);
        const states::Polarization& remote = outcome.collapsed_remote;
        const states::PolarizationBasis detector{0.0};
        switch (cfg.amplifier.kind) {
            case devices::AmplifierKind::deterministic: {
                const auto beam =
                    devices::amplify_deterministic(remote.angle_deg(), cfg.amplifier);
                rec.counts = devices::detect_counts(beam, detector, stream);
                break;
            }
            case devices::AmplifierKind::urn: {
                const auto beam =
                    devices::amplify_urn(remote.angle_deg(), cfg.amplifier, stream);
                rec.counts = devices::detect_counts(beam, detector, stream);
                break;
            }
            case devices::AmplifierKind::covariant:
                rec.counts = covariant_counts(remote, stream);
                break;
        }
        rec.readout_bit = devices::decode(rec.counts, threshold);
        return rec;
    }
};

}  // namespace

const char* to_string(Source source) {
    return source == Source::bell ? "bell" : "spdc";
}

const char* to_string(NonCoincidencePolicy policy) {
    return policy == NonCoincidencePolicy::random_bit ? "random-bit" : "drop";
}

long RunConfig::resolved_threshold() const {
    if (threshold < 0) throw std::invalid_argument("RunConfig: negative threshold");
    return threshold != 0 ? threshold : devices::default_threshold(amplifier.m);
}

TrialRecord run_trial(const RunConfig& config, int sent_bit, long trial_index) {
    if (sent_bit != 0 && sent_bit != 1) {
        throw std::invalid_argument("run_trial: sent_bit must be 0 or 1");
    }
    if (trial_index < 0) throw std::invalid_argument("run_trial: negative trial index");
    const TrialEngine engine(config);
    return engine.run(trial_index, sent_bit);
}

ChannelEstimate estimate_channel(const RunConfig& config,
                                 std::vector<TrialRecord>* per_trial) {
    if (config.trials <= 0) throw std::invalid_argument("estimate_channel: trials must be positive");
    const TrialEngine engine(config);

    std::vector<TrialRecord> local;
    std::vector<TrialRecord>& records = per_trial ? *per_trial : local;
    records.assign(static_cast<std::size_t>(config.trials), TrialRecord{});

    const int jobs = std::clamp(config.jobs, 1, 256);
    if (jobs == 1) {
        for (long i = 0; i < config.trials; ++i) {
            records[static_cast<std::size_t>(i)] = engine.run(i, -1);
        }
    } else {
        const long chunk = (config.trials + jobs - 1) / jobs;
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> failures(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    const long begin = static_cast<long>(w) * chunk;
                    const long end = std::min(begin + chunk, config.trials);
                    for (long i = begin; i < end; ++i) {
                        records[static_cast<std::size_t>(i)] = engine.run(i, -1);
                    }
                } catch (...) {
                    failures[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& failure : failures) {
            if (failure) std::rethrow_exception(failure);
        }
    }

    ChannelEstimate est;
    est.trials = config.trials;
    for (const TrialRecord& rec : records) {
        if (rec.readout_bit < 0) continue;
        ++est.confusion[static_cast<std::size_t>(rec.sent_bit)]
                       [static_cast<std::size_t>(rec.readout_bit)];
        ++est.retained;
    }

    const long errors = est.confusion[0][1] + est.confusion[1][0];
    if (est.retained > 0) {
        est.ber = static_cast<double>(errors) / static_cast<double>(est.retained);
        const auto ci = stats::wilson_interval(errors, est.retained);
        est.ci_low = ci.low;
        est.ci_high = ci.high;
        est.mutual_information = stats::mi_miller_madow_bits(
            {{est.confusion[0][0], est.confusion[0][1]},
             {est.confusion[1][0], est.confusion[1][1]}});
        if (est.confusion[0][0] + est.confusion[0][1] > 0 &&
            est.confusion[1][0] + est.confusion[1][1] > 0) {
            std::array<std::array<double, 2>, 2> transition{};
            for (int x = 0; x < 2; ++x) {
                const double row = static_cast<double>(est.confusion[static_cast<std::size_t>(x)][0] +
                                                       est.confusion[static_cast<std::size_t>(x)][1]);
                for (int y = 0; y < 2; ++y) {
                    transition[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
                        static_cast<double>(
                            est.confusion[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]) / row;
                }
            }
            est.capacity = capacity_blahut_arimoto(transition).bits;
        } else {
            // One input never survived to the decoder; the empirical channel
            // is only half-defined, so report what the data supports.
            est.capacity = est.mutual_information;
        }
    } else {
        est.ci_low = 0.0;
        est.ci_high = 1.0;
    }
    est.snr = snr_formula(config.amplifier.m);
    return est;
}

SweepResult sweep_m(const RunConfig& base, std::span<const long> m_values) {
    if (m_values.size() < 2) {
        throw std::invalid_argument("sweep_m: need at least two m values");
    }
    if (base.amplifier.kind == devices::AmplifierKind::covariant) {
        throw std::invalid_argument(
            "sweep_m: the sweep compares against the closed-form composition error; "
            "use the deterministic or urn amplifier");
    }
    SweepResult result;
    std::vector<double> log_m, log_snr;
    for (long m : m_values) {
        RunConfig cfg = base;
        cfg.amplifier = base.amplifier.kind == devices::AmplifierKind::urn
                            ? devices::AmplifierModel::urn(m)
                            : devices::AmplifierModel::deterministic(m);
        const ChannelEstimate est = estimate_channel(cfg);
        SweepPoint point;
        point.m = m;
        point.ber = est.ber;
        point.ci_low = est.ci_low;
        point.ci_high = est.ci_high;
        point.ber_exact = exact_ber(cfg);
        point.snr = est.snr;
        result.points.push_back(point);
        if (m > 0) {
            log_m.push_back(std::log(static_cast<double>(m)));
            log_snr.push_back(std::log(point.snr));
        }
    }
    if (log_m.size() < 2) {
        throw std::invalid_argument("sweep_m: need at least two positive m values for the slope");
    }
    result.snr_slope = stats::fit_line(log_m, log_snr).slope;
    return result;
}

// ---------------------------------------------------------------------------
// No-signaling analysis

namespace {

// Marginal receiver-count pmfs for the two encoder settings.  Conditioned on
// a coincidence pair: under setting 0 the remote photon arrives at 0 or 90
// degrees (probability 1/2 each), under setting 1 at 45 or 135.
NoSignalingReport composition_report(const devices::AmplifierModel& model) {
    const long n = model.output_photons();
    NoSignalingReport report;
    report.support.reserve(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k <= n; ++k) {
        report.support.emplace_back(k, n - k);
    }
    report.setting0_pmf.assign(static_cast<std::size_t>(n) + 1, 0.0);
    report.setting1_pmf.assign(static_cast<std::size_t>(n) + 1, 0.0);

    if (model.kind == devices::AmplifierKind::deterministic) {
        // Remote at 0: counts (2m+1, m); remote at 90: counts (m, 2m+1).
        report.setting0_pmf[static_cast<std::size_t>(2 * model.m + 1)] += 0.5;
        report.setting0_pmf[static_cast<std::size_t>(model.m)] += 0.5;
    } else {
        const auto comp = devices::urn_composition_pmf(model.m);
        for (std::size_t k = 0; k < comp.size(); ++k) {
            // n_parallel = k + 1 photons along the remote angle.
            report.setting0_pmf[k + 1] += 0.5 * comp[k];
            report.setting0_pmf[static_cast<std::size_t>(3 * model.m) - k] += 0.5 * comp[k];
        }
    }
    // At 45 or 135 degrees every photon passes either port with probability
    // 1/2 regardless of the beam composition.
    for (long k = 0; k <= n; ++k) {
        report.setting1_pmf[static_cast<std::size_t>(k)] =
            stats::binomial_pmf(n, k, 0.5);
    }
    return report;
}

NoSignalingReport covariant_report(const devices::AmplifierModel& model) {
    const devices::CovariantAmplifier amp(model);
    const auto pmf_at = [&](double angle) {
        return amp.count_pmf(states::Polarization::linear(angle), 0.0);
    };
    const auto p0a = pmf_at(0.0), p0b = pmf_at(90.0);
    const auto p1a = pmf_at(45.0), p1b = pmf_at(135.0);

    NoSignalingReport report;
    report.support.reserve(p0a.support.size());
    for (const auto& occ : p0a.support) {
        report.support.emplace_back(occ[0], occ[1]);
    }
    report.setting0_pmf.resize(report.support.size());
    report.setting1_pmf.resize(report.support.size());
    for (std::size_t i = 0; i < report.support.size(); ++i) {
        report.setting0_pmf[i] = 0.5 * (p0a.probabilities[i] + p0b.probabilities[i]);
        report.setting1_pmf[i] = 0.5 * (p1a.probabilities[i] + p1b.probabilities[i]);
    }
    double total0 = 0.0, total1 = 0.0;
    for (double p : report.setting0_pmf) total0 += p;
    for (double p : report.setting1_pmf) total1 += p;
    report.leakage = std::max(1.0 - total0, 1.0 - total1);
    return report;
}

}  // namespace

NoSignalingReport no_signaling_test(const devices::AmplifierModel& model) {
    NoSignalingReport report = model.kind == devices::AmplifierKind::covariant
                                   ? covariant_report(model)
                                   : composition_report(model);
    report.tv_distance = stats::total_variation(report.setting0_pmf, report.setting1_pmf);
    report.mi_upper = stats::jensen_shannon_bits(report.setting0_pmf, report.setting1_pmf);
    return report;
}

double mc_setting_mi(const devices::AmplifierModel& model, long samples,
                     std::uint64_t seed) {
    if (samples <= 0) throw std::invalid_argument("mc_setting_mi: samples must be positive");
    const NoSignalingReport report = (model.kind == devices::AmplifierKind::covariant)
                                         ? covariant_report(model)
                                         : composition_report(model);
    const rng::CdfSampler sampler0(report.setting0_pmf);
    const rng::CdfSampler sampler1(report.setting1_pmf);
    // Tabulate the receiver's decision statistic delta = n_r - n_r' rather
    // than the raw count pair: its support is O(photon number), so every bin
    // holds many samples and the Miller-Madow correction stays within its
    // validity regime.  (Any per-sample reduction can only lower the true
    // mutual information, which is the quantity under test.)
    long delta_min = 0, delta_max = 0;
    for (const auto& [n_r, n_r_prime] : report.support) {
        delta_min = std::min(delta_min, n_r - n_r_prime);
        delta_max = std::max(delta_max, n_r - n_r_prime);
    }
    std::vector<std::size_t> delta_bin(report.support.size());
    for (std::size_t i = 0; i < report.support.size(); ++i) {
        const auto& [n_r, n_r_prime] = report.support[i];
        delta_bin[i] = static_cast<std::size_t>(n_r - n_r_prime - delta_min);
    }
    std::vector<std::vector<long>> counts(
        2, std::vector<long>(static_cast<std::size_t>(delta_max - delta_min) + 1, 0));
    for (long i = 0; i < samples; ++i) {
        rng::Stream stream(seed, static_cast<std::uint64_t>(i));
        const int setting = stream.bit();
        const std::size_t cell = setting == 0 ? sampler0.sample(stream)
                                              : sampler1.sample(stream);
        ++counts[static_cast<std::size_t>(setting)][delta_bin[cell]];
    }
    return stats::mi_miller_madow_bits(counts);
}

// ---------------------------------------------------------------------------
// Information quantities

double mutual_information(const std::array<std::array<double, 2>, 2>& confusion,
                          const std::array<double, 2>& prior) {
    double prior_total = prior[0] + prior[1];
    if (prior[0] < 0.0 || prior[1] < 0.0 || !(prior_total > 0.0)) {
        throw std::invalid_argument("mutual_information: invalid prior");
    }
    std::vector<std::vector<double>> joint(2, std::vector<double>(2, 0.0));
    for (int x = 0; x < 2; ++x) {
        const double row = confusion[static_cast<std::size_t>(x)][0] +
                           confusion[static_cast<std::size_t>(x)][1];
        if (!(row > 0.0)) {
            throw DegenerateMatrix("mutual_information: confusion row has no events");
        }
        for (int y = 0; y < 2; ++y) {
            joint[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
                (prior[static_cast<std::size_t>(x)] / prior_total) *
                (confusion[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] / row);
        }
    }
    return stats::mi_plugin_bits(joint);
}

CapacityResult capacity_blahut_arimoto(const std::array<std::array<double, 2>, 2>& transition,
                                       double tol_bits, int max_iterations) {
    for (int x = 0; x < 2; ++x) {
        double row = 0.0;
        for (int y = 0; y < 2; ++y) {
            const double w = transition[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
            if (w < -1e-12) throw NonStochasticRows("capacity: negative transition probability");
            row += w;
        }
        if (std::abs(row - 1.0) > 1e-9) {
            throw NonStochasticRows("capacity: transition row does not sum to one");
        }
    }

    CapacityResult result;
    std::array<double, 2> p = {0.5, 0.5};
    for (int it = 1; it <= max_iterations; ++it) {
        std::array<double, 2> q = {0.0, 0.0};
        for (int x = 0; x < 2; ++x) {
            for (int y = 0; y < 2; ++y) {
                q[static_cast<std::size_t>(y)] +=
                    p[static_cast<std::size_t>(x)] *
                    transition[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
            }
        }
        std::array<double, 2> divergence = {0.0, 0.0};
        for (int x = 0; x < 2; ++x) {
            for (int y = 0; y < 2; ++y) {
                const double w =
                    transition[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
                if (w > 0.0) {
                    divergence[static_cast<std::size_t>(x)] +=
                        w * std::log(w / q[static_cast<std::size_t>(y)]);
                }
            }
        }
        const double lower = p[0] * divergence[0] + p[1] * divergence[1];
        const double upper = std::max(divergence[0], divergence[1]);
        result.bits = std::max(0.0, lower / kLn2);
        result.prior = p;
        result.iterations = it;
        if ((upper - lower) / kLn2 < tol_bits) break;
        const double z0 = p[0] * std::exp(divergence[0]);
        const double z1 = p[1] * std::exp(divergence[1]);
        p = {z0 / (z0 + z1), z1 / (z0 + z1)};
    }
    return result;
}

double exact_signal1_error(long m, long threshold) {
    if (m < 0) throw std::invalid_argument("exact_signal1_error: negative m");
    if (threshold < 1) throw std::invalid_argument("exact_signal1_error: threshold must be >= 1");
    return stats::symmetric_difference_tail(3 * m + 1, threshold);
}

double exact_ber(const RunConfig& config) {
    const long t = config.resolved_threshold();
    const long m = config.amplifier.m;
    double p0 = 0.0;
    switch (config.amplifier.kind) {
        case devices::AmplifierKind::deterministic:
            // The composed counts are (2m+1, m) up to orientation, so the
            // magnitude of the difference is always m+1.
            p0 = (m + 1 >= t) ? 0.0 : 1.0;
            break;
        case devices::AmplifierKind::urn: {
            const auto comp = devices::urn_composition_pmf(m);
            for (std::size_t k = 0; k < comp.size(); ++k) {
                const long delta = 2 * static_cast<long>(k) + 1 - 3 * m;
                if (std::labs(delta) < t) p0 += comp[k];
            }
            break;
        }
        case devices::AmplifierKind::covariant:
            return std::numeric_limits<double>::quiet_NaN();
    }
    const double p1 = exact_signal1_error(m, t);
    const double coincident = 0.5 * (p0 + p1);
    if (config.source == Source::bell) return coincident;
    if (config.policy == NonCoincidencePolicy::drop_trial) return coincident;
    // Half the emissions bunch into one beam and the receiver guesses.
    return 0.5 * coincident + 0.25;
}

double snr_formula(long m) {
    if (m < 0) throw std::invalid_argument("snr_formula: negative m");
    return (static_cast<double>(m) + 1.0) / std::sqrt(3.0 * static_cast<double>(m) + 1.0);
}

}  // namespace entlink::channel
