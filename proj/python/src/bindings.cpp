#include "entlink/channel.hpp"
#include "entlink/devices.hpp"
#include "entlink/errors.hpp"
#include "entlink/rng.hpp"
#include "entlink/states.hpp"
#include "entlink/version.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace py = pybind11;

namespace {

using namespace entlink;

devices::AmplifierModel make_model(const std::string& amplifier, long m,
                                   std::optional<double> gain, int truncation,
                                   double leak_tol) {
    if (amplifier == "deterministic") return devices::AmplifierModel::deterministic(m);
    if (amplifier == "urn") return devices::AmplifierModel::urn(m);
    if (amplifier == "covariant") {
        if (gain.has_value()) {
            return devices::AmplifierModel::covariant_gain(*gain, truncation, leak_tol);
        }
        return devices::AmplifierModel::covariant(m, truncation, leak_tol);
    }
    throw std::invalid_argument("unknown amplifier kind: " + amplifier +
                                " (expected deterministic, urn, or covariant)");
}

channel::Source parse_source(const std::string& name) {
    if (name == "bell") return channel::Source::bell;
    if (name == "spdc") return channel::Source::spdc;
    throw std::invalid_argument("unknown source: " + name + " (expected bell or spdc)");
}

channel::NonCoincidencePolicy parse_policy(const std::string& name) {
    if (name == "random-bit") return channel::NonCoincidencePolicy::random_bit;
    if (name == "drop") return channel::NonCoincidencePolicy::drop_trial;
    throw std::invalid_argument("unknown non-coincidence policy: " + name +
                                " (expected random-bit or drop)");
}

states::PairState parse_pair(const std::string& name) {
    if (name == "bell") return states::PairState::bell_pair();
    if (name == "spdc") return states::PairState::spdc_pair();
    if (name == "spdc-coincident") {
        return states::PairState::spdc_pair().conditioned_on_coincidence();
    }
    throw std::invalid_argument("unknown pair state: " + name +
                                " (expected bell, spdc, or spdc-coincident)");
}

channel::RunConfig make_run_config(const std::string& source, const std::string& amplifier,
                                   long m, long trials, std::uint64_t seed, long threshold,
                                   const std::string& policy, int jobs,
                                   std::optional<double> gain, int truncation,
                                   double leak_tol) {
    channel::RunConfig config;
    config.source = parse_source(source);
    config.amplifier = make_model(amplifier, m, gain, truncation, leak_tol);
    config.trials = trials;
    config.seed = seed;
    config.threshold = threshold;
    config.policy = parse_policy(policy);
    config.jobs = jobs;
    return config;
}

py::dict estimate_to_dict(const channel::ChannelEstimate& estimate, long threshold) {
    py::dict out;
    out["trials"] = estimate.trials;
    out["retained"] = estimate.retained;
    out["threshold"] = threshold;
    out["confusion"] = estimate.confusion;
    out["ber"] = estimate.ber;
    out["ci_low"] = estimate.ci_low;
    out["ci_high"] = estimate.ci_high;
    out["mutual_information"] = estimate.mutual_information;
    out["capacity"] = estimate.capacity;
    out["snr"] = estimate.snr;
    return out;
}

py::dict report_to_dict(const channel::NoSignalingReport& report) {
    py::dict out;
    out["tv_distance"] = report.tv_distance;
    out["mi_upper"] = report.mi_upper;
    out["leakage"] = report.leakage;
    out["support"] = report.support;
    out["setting0_pmf"] = report.setting0_pmf;
    out["setting1_pmf"] = report.setting1_pmf;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Photon-count channel simulator for polarization-entangled pairs "
                "passed through optical amplifiers";
    mod.attr("__version__") = entlink::kVersion;

    // --- random streams -------------------------------------------------
    mod.def(
        "philox_block",
        [](const std::array<std::uint64_t, 4>& counter,
           const std::array<std::uint64_t, 2>& key) {
            return entlink::rng::Philox4x64::block(counter, key);
        },
        py::arg("counter"), py::arg("key"),
        "Raw Philox4x64-10 block: four output words for one (counter, key) pair.");

    py::class_<entlink::rng::Stream>(mod, "Stream",
                                     "Counter-based random stream keyed by "
                                     "(master_seed, stream_id); bit-compatible with "
                                     "numpy.random.Philox(key=seed | stream_id << 64).")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("master_seed"),
             py::arg("stream_id"))
        .def("next_u64", &entlink::rng::Stream::next_u64)
        .def("uniform", &entlink::rng::Stream::uniform)
        .def("bit", &entlink::rng::Stream::bit)
        .def("bernoulli", &entlink::rng::Stream::bernoulli, py::arg("p"))
        .def("binomial", &entlink::rng::Stream::binomial, py::arg("n"), py::arg("p"))
        .def(
            "categorical",
            [](entlink::rng::Stream& stream, const std::vector<double>& weights) {
                return stream.categorical(weights);
            },
            py::arg("weights"))
        .def_property_readonly("master_seed", &entlink::rng::Stream::master_seed)
        .def_property_readonly("stream_id", &entlink::rng::Stream::stream_id);

    // --- channel statistics ----------------------------------------------
    mod.def(
        "simulate",
        [](const std::string& source, const std::string& amplifier, long m, long trials,
           std::uint64_t seed, long threshold, const std::string& policy, int jobs,
           std::optional<double> gain, int truncation, double leak_tol) {
            const channel::RunConfig config =
                make_run_config(source, amplifier, m, trials, seed, threshold, policy,
                                jobs, gain, truncation, leak_tol);
            return estimate_to_dict(channel::estimate_channel(config),
                                    config.resolved_threshold());
        },
        py::arg("source") = "bell", py::arg("amplifier") = "deterministic",
        py::arg("m") = 100, py::arg("trials") = 10000, py::arg("seed") = 0,
        py::arg("threshold") = 0, py::arg("policy") = "random-bit", py::arg("jobs") = 1,
        py::arg("gain") = std::nullopt, py::arg("truncation") = 32,
        py::arg("leak_tol") = 1e-8,
        "Monte Carlo estimate of the one-bit channel: error rate with a Wilson "
        "interval, empirical mutual information and capacity, and the confusion "
        "matrix.  threshold=0 selects the default ceil((m+1)/2).");

    mod.def(
        "trial_records",
        [](const std::string& source, const std::string& amplifier, long m, long trials,
           std::uint64_t seed, long threshold, const std::string& policy, int jobs,
           std::optional<double> gain, int truncation, double leak_tol) {
            const channel::RunConfig config =
                make_run_config(source, amplifier, m, trials, seed, threshold, policy,
                                jobs, gain, truncation, leak_tol);
            std::vector<channel::TrialRecord> records;
            channel::estimate_channel(config, &records);
            py::list rows;
            for (const auto& record : records) {
                py::dict row;
                row["trial_index"] = record.trial_index;
                row["sent_bit"] = record.sent_bit;
                row["event_class"] = states::to_string(record.event_class);
                row["n_r"] = record.counts.n_r;
                row["n_r_prime"] = record.counts.n_r_prime;
                row["readout_bit"] = record.readout_bit;
                rows.append(row);
            }
            return rows;
        },
        py::arg("source") = "bell", py::arg("amplifier") = "deterministic",
        py::arg("m") = 100, py::arg("trials") = 10000, py::arg("seed") = 0,
        py::arg("threshold") = 0, py::arg("policy") = "random-bit", py::arg("jobs") = 1,
        py::arg("gain") = std::nullopt, py::arg("truncation") = 32,
        py::arg("leak_tol") = 1e-8,
        "Per-trial transcript of a simulate() run: one dict per trial with the sent "
        "bit, emission event class, analyzer port counts, and decoded bit.");

    mod.def(
        "sweep",
        [](const std::vector<long>& m_values, const std::string& source,
           const std::string& amplifier, long trials, std::uint64_t seed,
           const std::string& policy, int jobs) {
            channel::RunConfig base;
            base.source = parse_source(source);
            base.amplifier = make_model(amplifier, 0, std::nullopt, 32, 1e-8);
            base.trials = trials;
            base.seed = seed;
            base.policy = parse_policy(policy);
            base.jobs = jobs;
            const channel::SweepResult result = channel::sweep_m(base, m_values);
            py::list points;
            for (const auto& point : result.points) {
                py::dict row;
                row["m"] = point.m;
                row["ber"] = point.ber;
                row["ci_low"] = point.ci_low;
                row["ci_high"] = point.ci_high;
                row["ber_exact"] = point.ber_exact;
                row["snr"] = point.snr;
                points.append(row);
            }
            py::dict out;
            out["points"] = points;
            out["snr_slope"] = result.snr_slope;
            return out;
        },
        py::arg("m_values"), py::arg("source") = "bell",
        py::arg("amplifier") = "deterministic", py::arg("trials") = 10000,
        py::arg("seed") = 0, py::arg("policy") = "random-bit", py::arg("jobs") = 1,
        "Error rate and design SNR across amplifier sizes, with the fitted "
        "log-log slope of SNR against m.");

    mod.def(
        "exact_ber",
        [](const std::string& source, const std::string& amplifier, long m,
           long threshold, const std::string& policy) {
            channel::RunConfig config;
            config.source = parse_source(source);
            config.amplifier = make_model(amplifier, m, std::nullopt, 32, 1e-8);
            config.threshold = threshold;
            config.policy = parse_policy(policy);
            return channel::exact_ber(config);
        },
        py::arg("source") = "bell", py::arg("amplifier") = "deterministic",
        py::arg("m") = 100, py::arg("threshold") = 0, py::arg("policy") = "random-bit",
        "Closed-form error rate of the composition amplifiers (NaN for the "
        "covariant model, which has no closed form here).");

    mod.def("exact_signal1_error", &channel::exact_signal1_error, py::arg("m"),
            py::arg("threshold"),
            "P(|n_r - n_r_prime| >= threshold) for the bit-1 branch of the "
            "fixed-composition amplifier: the binomial tail that sets the error "
            "rate floor.");

    mod.def("snr_formula", &channel::snr_formula, py::arg("m"),
            "Design separation-to-noise ratio (m + 1) / sqrt(3m + 1).");

    mod.def("default_threshold", &devices::default_threshold, py::arg("m"),
            "Default decision threshold ceil((m + 1) / 2).");

    mod.def("urn_pmf", &devices::urn_composition_pmf, py::arg("m"),
            "Exact pmf of the urn amplifier's parallel additions: element k is "
            "P(k of the 3m added photons join the parallel mode).");

    // --- no-signaling tests ----------------------------------------------
    mod.def(
        "no_signaling",
        [](const std::string& amplifier, long m, std::optional<double> gain,
           int truncation, double leak_tol, long mi_samples, std::uint64_t mi_seed) {
            const devices::AmplifierModel model =
                make_model(amplifier, m, gain, truncation, leak_tol);
            py::dict out = report_to_dict(channel::no_signaling_test(model));
            if (mi_samples > 0) {
                out["mi_monte_carlo"] = channel::mc_setting_mi(model, mi_samples, mi_seed);
            }
            return out;
        },
        py::arg("amplifier") = "deterministic", py::arg("m") = 100,
        py::arg("gain") = std::nullopt, py::arg("truncation") = 32,
        py::arg("leak_tol") = 1e-8, py::arg("mi_samples") = 0, py::arg("mi_seed") = 0,
        "Receiver-side count distributions under the two sender settings: total "
        "variation distance, a Jensen-Shannon upper bound on extractable bits per "
        "use, and (with mi_samples > 0) a Monte Carlo estimate of the "
        "setting/count mutual information.");

    mod.def(
        "mutual_information",
        [](const std::array<std::array<double, 2>, 2>& confusion,
           const std::array<double, 2>& prior) {
            return channel::mutual_information(confusion, prior);
        },
        py::arg("confusion"), py::arg("prior"),
        "Mutual information in bits of a 2x2 count or probability table under "
        "the given input prior.  Rows are normalized internally.");

    mod.def(
        "capacity_blahut_arimoto",
        [](const std::array<std::array<double, 2>, 2>& transition, double tol_bits,
           int max_iterations) {
            const channel::CapacityResult result =
                channel::capacity_blahut_arimoto(transition, tol_bits, max_iterations);
            py::dict out;
            out["bits"] = result.bits;
            out["prior"] = result.prior;
            out["iterations"] = result.iterations;
            return out;
        },
        py::arg("transition"), py::arg("tol_bits") = 1e-12,
        py::arg("max_iterations") = 10000,
        "Capacity of a 2x2 transition matrix by Blahut-Arimoto iteration, with "
        "the maximizing input prior.");

    // --- pair states -----------------------------------------------------
    mod.def(
        "chsh",
        [](const std::string& pair, std::optional<std::array<double, 4>> angles) {
            states::ChshAngles chsh_angles;
            if (angles.has_value()) {
                chsh_angles = {(*angles)[0], (*angles)[1], (*angles)[2], (*angles)[3]};
            }
            return states::chsh_value(parse_pair(pair), chsh_angles);
        },
        py::arg("pair") = "bell", py::arg("angles") = std::nullopt,
        "CHSH value S = E(a,b) - E(a,b') + E(a',b) + E(a',b') at the given "
        "analyzer angles in degrees (default 0, 22.5, 45, 67.5).");

    mod.def(
        "correlation",
        [](const std::string& pair, double theta_s_deg, double theta_r_deg) {
            return states::correlation(parse_pair(pair), theta_s_deg, theta_r_deg);
        },
        py::arg("pair") = "bell", py::arg("theta_s_deg") = 0.0,
        py::arg("theta_r_deg") = 0.0,
        "Coincidence-basis polarization correlation E(theta_s, theta_r).");

    mod.def(
        "pair_events",
        []() {
            const states::PairState pair = states::PairState::spdc_pair();
            py::dict out;
            out["coincidence_prob"] =
                pair.event_probability(states::EventClass::coincidence);
            out["both_signal_prob"] =
                pair.event_probability(states::EventClass::both_signal);
            out["both_idler_prob"] =
                pair.event_probability(states::EventClass::both_idler);
            out["double_detection_signal"] =
                states::double_detection_amplitude(pair, states::Beam::signal);
            out["double_detection_idler"] =
                states::double_detection_amplitude(pair, states::Beam::idler);
            out["chsh_bell"] = states::chsh_value(states::PairState::bell_pair(), {});
            out["chsh_spdc_coincident"] = states::chsh_value(
                states::PairState::spdc_pair().conditioned_on_coincidence(), {});
            return out;
        },
        "Detector-pattern probabilities of the two-photon emission state, its "
        "double-detection norms, and the CHSH values of both pair preparations.");
}
