// Command-line front end: reproducible experiment runs emitting JSON or CSV
// artifacts.  Every artifact embeds the tool version, the fully resolved
// configuration (defaults and seed included), and a hash of that
// configuration, so any two runs are provably comparable.  Worker count,
// output path, and format are execution details, not experiment parameters;
// they are deliberately excluded from the echoed configuration so reruns
// with different --jobs values stay byte-identical.

#include "CLI11.hpp"
#include "json.hpp"

#include "entlink/channel.hpp"
#include "entlink/devices.hpp"
#include "entlink/errors.hpp"
#include "entlink/io.hpp"
#include "entlink/states.hpp"
#include "entlink/version.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

namespace channel = entlink::channel;
namespace devices = entlink::devices;
namespace states = entlink::states;
namespace io = entlink::io;
using ordered_json = nlohmann::ordered_json;

// All floating-point output is rounded to 12 significant digits before
// serialization; paired with deterministic sampling this makes the
// byte-identity contract hold wherever IEEE double semantics do.
double round12(double value) { return io::round_sig(value, 12); }
std::string fmt12(double value) { return io::format_sig(value, 12); }

struct CommonFlags {
    std::string out;            // empty: standard output
    std::string format = "json";
    std::uint64_t seed = 0;
    int jobs = 1;
};

void add_common(CLI::App* sub, CommonFlags* flags) {
    sub->add_option("--out", flags->out, "write the artifact to PATH (default: standard output)");
    sub->add_option("--format", flags->format, "artifact format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sub->add_option("--seed", flags->seed, "64-bit master seed; the sole source of randomness")
        ->capture_default_str();
    sub->add_option("--jobs", flags->jobs, "worker threads (outputs are identical for any value)")
        ->check(CLI::Range(1, 512))
        ->capture_default_str();
}

struct AmplifierFlags {
    std::string name = "deterministic";
    long m = 100;
    double gain = 0.0;  // < 1 means "derive from m"
    int truncation = 32;
    double leak_tol = 1e-8;
};

void add_amplifier(CLI::App* sub, AmplifierFlags* flags, double default_leak_tol) {
    flags->leak_tol = default_leak_tol;
    sub->add_option("--amplifier", flags->name,
                    "amplifier model ('paper' is an alias for deterministic)")
        ->check(CLI::IsMember({"deterministic", "paper", "urn", "covariant"}))
        ->capture_default_str();
    sub->add_option("--m", flags->m, "amplification parameter m (output 3m+1 photons, gain m+1)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--gain", flags->gain,
                    "covariant only: gain G >= 1 directly instead of deriving m+1 from --m")
        ->check(CLI::Range(1.0, 1e12));
    sub->add_option("--truncation", flags->truncation,
                    "covariant only: photon-number cutoff per output mode")
        ->check(CLI::Range(1, 100000))
        ->capture_default_str();
    sub->add_option("--leak-tol", flags->leak_tol,
                    "covariant only: largest tolerated truncation loss of squared norm")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
}

devices::AmplifierModel make_model(const AmplifierFlags& flags) {
    const std::string name = flags.name == "paper" ? "deterministic" : flags.name;
    if (name == "deterministic") return devices::AmplifierModel::deterministic(flags.m);
    if (name == "urn") return devices::AmplifierModel::urn(flags.m);
    if (flags.gain >= 1.0) {
        return devices::AmplifierModel::covariant_gain(flags.gain, flags.truncation,
                                                       flags.leak_tol);
    }
    return devices::AmplifierModel::covariant(flags.m, flags.truncation, flags.leak_tol);
}

void echo_amplifier(ordered_json* config, const devices::AmplifierModel& model) {
    (*config)["amplifier"] = devices::to_string(model.kind);
    (*config)["m"] = model.m;
    (*config)["gain"] = round12(model.gain);
    if (model.kind == devices::AmplifierKind::covariant) {
        (*config)["truncation"] = model.n_max;
        (*config)["leak_tol"] = round12(model.leak_tol);
    }
}

std::string config_hash(const ordered_json& config) {
    return io::hex64(io::fnv1a64(config.dump()));
}

ordered_json envelope(const std::string& command, const ordered_json& config,
                      ordered_json results) {
    ordered_json out;
    out["tool"] = {{"name", entlink::kToolName}, {"version", entlink::kVersion}};
    out["command"] = command;
    out["config"] = config;
    out["config_hash"] = config_hash(config);
    out["results"] = std::move(results);
    return out;
}

std::string csv_preamble(const std::string& command, const ordered_json& config) {
    std::ostringstream out;
    out << "# tool: " << entlink::kToolName << ' ' << entlink::kVersion << '\n'
        << "# command: " << command << '\n'
        << "# config: " << config.dump() << '\n'
        << "# config_hash: " << config_hash(config) << '\n';
    return out.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file '" + out_path + "'");
    file << text;
    if (!file.good()) throw std::runtime_error("failed writing output file '" + out_path + "'");
}

void emit_artifact(const std::string& command, const ordered_json& config,
                   const ordered_json& results, const std::string& csv_body,
                   const CommonFlags& common) {
    if (common.format == "json") {
        emit(envelope(command, config, results).dump(2) + "\n", common.out);
    } else {
        emit(csv_preamble(command, config) + csv_body, common.out);
    }
}

// --------------------------------------------------------------------------
// simulate

struct SimulateFlags {
    CommonFlags common;
    AmplifierFlags amplifier;
    std::string source = "bell";
    std::string policy = "random-bit";
    long trials = 10000;
    long threshold = 0;  // 0: use the model's midpoint threshold
    std::string per_trial;
};

channel::RunConfig make_run_config(const SimulateFlags& flags) {
    channel::RunConfig config;
    config.source =
        flags.source == "bell" ? channel::Source::bell : channel::Source::spdc;
    config.amplifier = make_model(flags.amplifier);
    config.trials = flags.trials;
    config.seed = flags.common.seed;
    config.threshold = flags.threshold;
    config.policy = flags.policy == "drop" ? channel::NonCoincidencePolicy::drop_trial
                                           : channel::NonCoincidencePolicy::random_bit;
    config.jobs = flags.common.jobs;
    return config;
}

ordered_json simulate_config_echo(const channel::RunConfig& config) {
    ordered_json echo;
    echo["source"] = channel::to_string(config.source);
    echo_amplifier(&echo, config.amplifier);
    echo["trials"] = config.trials;
    echo["seed"] = config.seed;
    echo["threshold"] = config.resolved_threshold();
    echo["policy"] = channel::to_string(config.policy);
    return echo;
}

void write_per_trial_csv(const std::string& path, const ordered_json& config,
                         const std::vector<channel::TrialRecord>& records) {
    std::ostringstream out;
    out << csv_preamble("simulate", config)
        << "trial_index,sent_bit,event_class,n_r,n_r_prime,readout_bit\n";
    for (const auto& rec : records) {
        out << rec.trial_index << ',' << rec.sent_bit << ','
            << states::to_string(rec.event_class) << ',' << rec.counts.n_r << ','
            << rec.counts.n_r_prime << ',' << rec.readout_bit << '\n';
    }
    emit(out.str(), path);
}

void run_simulate(const SimulateFlags& flags) {
    const channel::RunConfig config = make_run_config(flags);
    const ordered_json echo = simulate_config_echo(config);

    std::vector<channel::TrialRecord> records;
    const auto estimate = channel::estimate_channel(
        config, flags.per_trial.empty() ? nullptr : &records);

    ordered_json results;
    results["ber"] = round12(estimate.ber);
    results["ci_low"] = round12(estimate.ci_low);
    results["ci_high"] = round12(estimate.ci_high);
    results["mi"] = round12(estimate.mutual_information);
    results["capacity"] = round12(estimate.capacity);
    results["confusion"] = {{estimate.confusion[0][0], estimate.confusion[0][1]},
                            {estimate.confusion[1][0], estimate.confusion[1][1]}};
    results["trials"] = estimate.trials;
    results["retained"] = estimate.retained;
    results["snr"] = round12(estimate.snr);

    std::ostringstream csv;
    csv << "trials,retained,ber,ci_low,ci_high,mi,capacity,snr,"
           "confusion_00,confusion_01,confusion_10,confusion_11\n"
        << estimate.trials << ',' << estimate.retained << ',' << fmt12(estimate.ber)
        << ',' << fmt12(estimate.ci_low) << ',' << fmt12(estimate.ci_high) << ','
        << fmt12(estimate.mutual_information) << ',' << fmt12(estimate.capacity)
        << ',' << fmt12(estimate.snr) << ',' << estimate.confusion[0][0] << ','
        << estimate.confusion[0][1] << ',' << estimate.confusion[1][0] << ','
        << estimate.confusion[1][1] << '\n';

    emit_artifact("simulate", echo, results, csv.str(), flags.common);
    if (!flags.per_trial.empty()) write_per_trial_csv(flags.per_trial, echo, records);
}

// --------------------------------------------------------------------------
// sweep

struct SweepFlags {
    CommonFlags common;
    AmplifierFlags amplifier;
    std::string source = "bell";
    std::string policy = "random-bit";
    long trials = 10000;
    long threshold = 0;
    std::vector<long> m_list{16, 64, 256, 1024};
};

void run_sweep(const SweepFlags& flags) {
    SimulateFlags base_flags;
    base_flags.common = flags.common;
    base_flags.amplifier = flags.amplifier;
    base_flags.source = flags.source;
    base_flags.policy = flags.policy;
    base_flags.trials = flags.trials;
    base_flags.threshold = flags.threshold;
    channel::RunConfig base = make_run_config(base_flags);

    ordered_json echo;
    echo["source"] = channel::to_string(base.source);
    echo["amplifier"] = devices::to_string(base.amplifier.kind);
    echo["m_list"] = flags.m_list;
    echo["trials"] = base.trials;
    echo["seed"] = base.seed;
    // 0 keeps the per-point midpoint threshold (m+2)/2.
    echo["threshold"] = base.threshold;
    echo["policy"] = channel::to_string(base.policy);

    const auto sweep = channel::sweep_m(base, flags.m_list);

    ordered_json points = ordered_json::array();
    std::ostringstream csv;
    csv << "m,ber,ci_low,ci_high,ber_exact,snr\n";
    for (const auto& point : sweep.points) {
        points.push_back({{"m", point.m},
                          {"ber", round12(point.ber)},
                          {"ci_low", round12(point.ci_low)},
                          {"ci_high", round12(point.ci_high)},
                          {"ber_exact", round12(point.ber_exact)},
                          {"snr", round12(point.snr)}});
        csv << point.m << ',' << fmt12(point.ber) << ',' << fmt12(point.ci_low) << ','
            << fmt12(point.ci_high) << ',' << fmt12(point.ber_exact) << ','
            << fmt12(point.snr) << '\n';
    }
    csv << "# snr_slope: " << fmt12(sweep.snr_slope) << '\n';

    ordered_json results;
    results["points"] = std::move(points);
    results["snr_slope"] = round12(sweep.snr_slope);

    emit_artifact("sweep", echo, results, csv.str(), flags.common);
}

// --------------------------------------------------------------------------
// nosignal

struct NoSignalFlags {
    CommonFlags common;
    AmplifierFlags amplifier;
    long mi_samples = 0;  // 0: skip the Monte Carlo cross-check
};

void run_nosignal(const NoSignalFlags& flags) {
    const auto model = make_model(flags.amplifier);

    ordered_json echo;
    echo_amplifier(&echo, model);
    echo["seed"] = flags.common.seed;
    echo["mi_samples"] = flags.mi_samples;

    const auto report = channel::no_signaling_test(model);

    ordered_json support = ordered_json::array();
    ordered_json pmf0 = ordered_json::array();
    ordered_json pmf1 = ordered_json::array();
    for (std::size_t i = 0; i < report.support.size(); ++i) {
        support.push_back({report.support[i].first, report.support[i].second});
        pmf0.push_back(round12(report.setting0_pmf[i]));
        pmf1.push_back(round12(report.setting1_pmf[i]));
    }

    ordered_json results;
    results["tv_distance"] = round12(report.tv_distance);
    results["mi_upper"] = round12(report.mi_upper);
    results["leakage"] = round12(report.leakage);
    if (flags.mi_samples > 0) {
        results["mi_monte_carlo"] =
            round12(channel::mc_setting_mi(model, flags.mi_samples, flags.common.seed));
    }
    results["support"] = std::move(support);
    results["setting0_pmf"] = std::move(pmf0);
    results["setting1_pmf"] = std::move(pmf1);

    std::ostringstream csv;
    csv << "# tv_distance: " << fmt12(report.tv_distance) << '\n'
        << "# mi_upper: " << fmt12(report.mi_upper) << '\n'
        << "# leakage: " << fmt12(report.leakage) << '\n';
    if (flags.mi_samples > 0) {
        csv << "# mi_monte_carlo: " << results["mi_monte_carlo"].dump() << '\n';
    }
    csv << "n_r,n_r_prime,setting0_pmf,setting1_pmf\n";
    for (std::size_t i = 0; i < report.support.size(); ++i) {
        csv << report.support[i].first << ',' << report.support[i].second << ','
            << fmt12(report.setting0_pmf[i]) << ',' << fmt12(report.setting1_pmf[i])
            << '\n';
    }

    emit_artifact("nosignal", echo, results, csv.str(), flags.common);
}

// --------------------------------------------------------------------------
// spdc and chsh

ordered_json pair_analysis(const states::ChshAngles& angles) {
    const auto pair = states::PairState::spdc_pair();
    const auto bell = states::PairState::bell_pair();

    ordered_json results;
    results["coincidence_prob"] =
        round12(pair.event_probability(states::EventClass::coincidence));
    results["both_signal_prob"] =
        round12(pair.event_probability(states::EventClass::both_signal));
    results["both_idler_prob"] =
        round12(pair.event_probability(states::EventClass::both_idler));
    results["double_detection_norms"] = {
        {"signal", round12(states::double_detection_amplitude(pair, states::Beam::signal))},
        {"idler", round12(states::double_detection_amplitude(pair, states::Beam::idler))}};
    results["chsh_bell"] = round12(states::chsh_value(bell, angles));
    results["chsh_spdc_u"] = round12(states::chsh_value(pair, angles));
    return results;
}

std::string pair_analysis_csv(const ordered_json& results) {
    std::ostringstream csv;
    csv << "quantity,value\n"
        << "coincidence_prob," << results["coincidence_prob"].dump() << '\n'
        << "both_signal_prob," << results["both_signal_prob"].dump() << '\n'
        << "both_idler_prob," << results["both_idler_prob"].dump() << '\n'
        << "double_detection_norm_signal,"
        << results["double_detection_norms"]["signal"].dump() << '\n'
        << "double_detection_norm_idler,"
        << results["double_detection_norms"]["idler"].dump() << '\n'
        << "chsh_bell," << results["chsh_bell"].dump() << '\n'
        << "chsh_spdc_u," << results["chsh_spdc_u"].dump() << '\n';
    return csv.str();
}

void run_spdc(const CommonFlags& common) {
    const states::ChshAngles angles;  // canonical 0 / 22.5 / 45 / 67.5
    ordered_json echo;
    echo["angles"] = {angles.a_deg, angles.b_deg, angles.a_prime_deg, angles.b_prime_deg};
    echo["seed"] = common.seed;
    const ordered_json results = pair_analysis(angles);
    emit_artifact("spdc", echo, results, pair_analysis_csv(results), common);
}

void run_chsh(const CommonFlags& common, const std::vector<double>& angle_list) {
    if (angle_list.size() != 4) {
        throw CLI::ValidationError("--angles", "expected four comma-separated analyzer angles");
    }
    const states::ChshAngles angles{angle_list[0], angle_list[1], angle_list[2],
                                    angle_list[3]};
    ordered_json echo;
    echo["angles"] = {angles.a_deg, angles.b_deg, angles.a_prime_deg, angles.b_prime_deg};
    echo["seed"] = common.seed;
    const ordered_json results = pair_analysis(angles);
    emit_artifact("chsh", echo, results, pair_analysis_csv(results), common);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entangled-pair amplification channel simulator"};
    app.set_version_flag("--version", std::string(entlink::kToolName) + " " + entlink::kVersion);
    app.require_subcommand(1);

    SimulateFlags simulate;
    auto* sim = app.add_subcommand(
        "simulate", "Monte Carlo bit-error and information estimates for one channel");
    add_common(sim, &simulate.common);
    add_amplifier(sim, &simulate.amplifier, 1e-8);
    sim->add_option("--source", simulate.source,
                    "pair source ('spdc-u' is an alias for spdc)")
        ->check(CLI::IsMember({"bell", "spdc", "spdc-u"}))
        ->capture_default_str();
    sim->add_option("--trials", simulate.trials, "number of Monte Carlo trials")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--threshold", simulate.threshold,
                    "decision threshold on |n_r - n_r'| (0: midpoint default (m+2)/2)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sim->add_option("--policy", simulate.policy, "non-coincidence trial handling")
        ->check(CLI::IsMember({"random-bit", "drop"}))
        ->capture_default_str();
    sim->add_option("--per-trial", simulate.per_trial,
                    "also write a per-trial CSV record to PATH");
    sim->callback([&] {
        if (simulate.source == "spdc-u") simulate.source = "spdc";
        run_simulate(simulate);
    });

    SweepFlags sweep;
    auto* swp = app.add_subcommand(
        "sweep", "repeat the channel estimate across amplification sizes m");
    add_common(swp, &sweep.common);
    add_amplifier(swp, &sweep.amplifier, 1e-8);
    swp->add_option("--source", sweep.source, "pair source ('spdc-u' is an alias for spdc)")
        ->check(CLI::IsMember({"bell", "spdc", "spdc-u"}))
        ->capture_default_str();
    swp->add_option("--m-list", sweep.m_list, "comma-separated m values (at least two)")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
    swp->add_option("--trials", sweep.trials, "Monte Carlo trials per point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    swp->add_option("--threshold", sweep.threshold,
                    "fixed decision threshold (0: per-point midpoint default)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    swp->add_option("--policy", sweep.policy, "non-coincidence trial handling")
        ->check(CLI::IsMember({"random-bit", "drop"}))
        ->capture_default_str();
    swp->callback([&] {
        if (sweep.source == "spdc-u") sweep.source = "spdc";
        if (sweep.amplifier.name == "covariant") {
            throw CLI::ValidationError(
                "--amplifier", "sweep needs an m-parameterized model (deterministic or urn)");
        }
        run_sweep(sweep);
    });

    NoSignalFlags nosignal;
    auto* nos = app.add_subcommand(
        "nosignal", "exact receiver marginals for the two encoder settings");
    add_common(nos, &nosignal.common);
    // The report itself is exact and truncation only rescales the covariant
    // pmfs uniformly, so this subcommand tolerates loose truncation by
    // default and reports the leakage it actually incurred.
    add_amplifier(nos, &nosignal.amplifier, 0.1);
    nos->add_option("--mi-samples", nosignal.mi_samples,
                    "Monte Carlo sample count for the setting-information cross-check "
                    "(0: skip)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    nos->callback([&] { run_nosignal(nosignal); });

    CommonFlags spdc_common;
    auto* spd = app.add_subcommand(
        "spdc", "emission-state event classes, double detection, and CHSH values");
    add_common(spd, &spdc_common);
    spd->callback([&] { run_spdc(spdc_common); });

    CommonFlags chsh_common;
    std::vector<double> chsh_angles{0.0, 22.5, 45.0, 67.5};
    auto* chs = app.add_subcommand("chsh", "CHSH combination at chosen analyzer angles");
    add_common(chs, &chsh_common);
    chs->add_option("--angles", chsh_angles,
                    "four comma-separated analyzer angles a,b,a',b' in degrees")
        ->delimiter(',');
    chs->callback([&] { run_chsh(chsh_common, chsh_angles); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const entlink::LeakageExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
