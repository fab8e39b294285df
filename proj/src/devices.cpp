#include "entlink/devices.hpp"

#include "entlink/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace entlink::devices {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void require_kind(const AmplifierModel& model, AmplifierKind kind, const char* what) {
    if (model.kind != kind) {
        throw std::invalid_argument(std::string(what) + ": wrong amplifier kind '" +
                                    to_string(model.kind) + "'");
    }
}

void require_m(long m) {
    if (m < 0) throw std::invalid_argument("amplifier: negative m");
}

}  // namespace

const char* to_string(AmplifierKind kind) {
    switch (kind) {
        case AmplifierKind::deterministic: return "deterministic";
        case AmplifierKind::urn: return "urn";
        case AmplifierKind::covariant: return "covariant";
    }
    return "?";
}

AmplifierModel AmplifierModel::deterministic(long m) {
    require_m(m);
    AmplifierModel model;
    model.kind = AmplifierKind::deterministic;
    model.m = m;
    model.gain = static_cast<double>(m) + 1.0;
    return model;
}

AmplifierModel AmplifierModel::urn(long m) {
    require_m(m);
    AmplifierModel model;
    model.kind = AmplifierKind::urn;
    model.m = m;
    model.gain = static_cast<double>(m) + 1.0;
    return model;
}

AmplifierModel AmplifierModel::covariant(long m, int n_max, double leak_tol) {
    require_m(m);
    AmplifierModel model;
    model.kind = AmplifierKind::covariant;
    model.m = m;
    model.gain = static_cast<double>(m) + 1.0;
    model.n_max = n_max;
    model.leak_tol = leak_tol;
    return model;
}

AmplifierModel AmplifierModel::covariant_gain(double gain, int n_max, double leak_tol) {
    if (!(gain >= 1.0)) throw std::invalid_argument("covariant amplifier: gain must be >= 1");
    AmplifierModel model;
    model.kind = AmplifierKind::covariant;
    model.gain = gain;
    model.m = std::max(0L, std::lround(gain) - 1);
    model.n_max = n_max;
    model.leak_tol = leak_tol;
    return model;
}

AmplifiedBeam amplify_deterministic(double angle_deg, const AmplifierModel& model) {
    require_kind(model, AmplifierKind::deterministic, "amplify_deterministic");
    return {angle_deg, 2 * model.m + 1, model.m};
}

AmplifiedBeam amplify_urn(double angle_deg, const AmplifierModel& model,
                          rng::Stream& stream) {
    require_kind(model, AmplifierKind::urn, "amplify_urn");
    long n_par = 1;
    long n_perp = 0;
    for (long step = 0; step < 3 * model.m; ++step) {
        const double p_par = static_cast<double>(n_par + 1) /
                             static_cast<double>(n_par + n_perp + 2);
        if (stream.bernoulli(p_par)) {
            ++n_par;
        } else {
            ++n_perp;
        }
    }
    return {angle_deg, n_par, n_perp};
}

std::vector<double> urn_composition_pmf(long m) {
    require_m(m);
    // Unrolling the product of conditional probabilities over any addition
    // order gives C(3m,k) * (k+1)! * (3m-k)! * 2 / (3m+2)!, which collapses to
    // a linear pmf in k.
    const double n = static_cast<double>(3 * m);
    std::vector<double> pmf(static_cast<std::size_t>(3 * m) + 1);
    const double denom = (n + 1.0) * (n + 2.0);
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        pmf[k] = 2.0 * (static_cast<double>(k) + 1.0) / denom;
    }
    return pmf;
}

// ---------------------------------------------------------------------------
// Covariant amplifier

CovariantAmplifier::CovariantAmplifier(const AmplifierModel& model) : model_(model) {
    require_kind(model, AmplifierKind::covariant, "CovariantAmplifier");
    if (!(model.gain >= 1.0)) {
        throw std::invalid_argument("covariant amplifier: gain must be >= 1");
    }
    if (model.n_max < 1) {
        throw std::invalid_argument("covariant amplifier: n_max must be at least 1");
    }
    // G = cosh^2 r.
    const double r = std::acosh(std::sqrt(model.gain));

    const fock::ModeLayout layout({"out", "idler"}, model.n_max);
    const int d = model.n_max + 1;
    const auto weights_for = [&](int input_photons) {
        auto state = fock::FockStateVector::vacuum(layout);
        for (int p = 0; p < input_photons; ++p) {
            state = apply_ladder(state, "out", fock::Ladder::creation);
        }
        const auto squeezed =
            two_mode_squeeze(state, "out", "idler", r, model.leak_tol);
        // Idler traced out: weight of finding n photons in the output mode.
        Eigen::VectorXd weights = Eigen::VectorXd::Zero(d);
        for (int n = 0; n < d; ++n) {
            for (int j = 0; j < d; ++j) {
                weights(n) += std::norm(
                    squeezed.amplitudes()(static_cast<Eigen::Index>(layout.index_of(
                        std::array<int, 2>{n, j}))));
            }
        }
        return weights;
    };
    diag0_ = weights_for(0);
    diag1_ = weights_for(1);
    leakage_ = std::max(1.0 - diag0_.sum(), 1.0 - diag1_.sum());
}

const Eigen::VectorXd& CovariantAmplifier::branch_weights(int input_photons) const {
    if (input_photons == 0) return diag0_;
    if (input_photons == 1) return diag1_;
    throw std::invalid_argument("branch_weights: only 0 or 1 input photons are modeled");
}

fock::CountDistribution CovariantAmplifier::count_pmf(const Eigen::Matrix2cd& input_density,
                                                      double basis_deg) const {
    if ((input_density - input_density.adjoint()).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("count_pmf: input density is not Hermitian");
    }
    if (std::abs(input_density.trace().real() - 1.0) > 1e-9) {
        throw std::invalid_argument("count_pmf: input density trace differs from one");
    }
    // Equal gains make the amplifier commute with polarization rotations, so
    // rotating the analyzer by theta is the same as counter-rotating the
    // input.  Off-diagonal input terms cannot reach the joint count diagonal
    // (each squeezer preserves the photon-number difference between its output
    // and idler), so only the rotated diagonal weights matter.
    const double t = basis_deg * kPi / 180.0;
    Eigen::Matrix2cd rot;
    rot << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    const Eigen::Matrix2cd in_basis = rot * input_density * rot.adjoint();
    const double w_parallel = in_basis(0, 0).real();
    const double w_perpendicular = in_basis(1, 1).real();

    const int d = model_.n_max + 1;
    fock::CountDistribution dist;
    dist.modes = {"out_r", "out_r_prime"};
    dist.support.reserve(static_cast<std::size_t>(d) * d);
    dist.probabilities.reserve(static_cast<std::size_t>(d) * d);
    for (int nr = 0; nr < d; ++nr) {
        for (int np = 0; np < d; ++np) {
            dist.support.push_back({nr, np});
            dist.probabilities.push_back(w_parallel * diag1_(nr) * diag0_(np) +
                                         w_perpendicular * diag0_(nr) * diag1_(np));
        }
    }
    const double leaked = 1.0 - dist.total();
    if (leaked > model_.leak_tol) {
        throw LeakageExceeded(leaked, model_.leak_tol, model_.n_max);
    }
    return dist;
}

fock::CountDistribution CovariantAmplifier::count_pmf(const states::Polarization& input,
                                                      double basis_deg) const {
    return count_pmf(input.density(), basis_deg);
}

fock::CountDistribution amplify_covariant(const states::Polarization& input,
                                          const AmplifierModel& model, double basis_deg) {
    return CovariantAmplifier(model).count_pmf(input, basis_deg);
}

// ---------------------------------------------------------------------------
// Detection and decoding

PhotonCounts detect_counts(const AmplifiedBeam& beam, states::PolarizationBasis basis,
                           rng::Stream& stream) {
    if (beam.n_parallel < 0 || beam.n_perpendicular < 0) {
        throw std::invalid_argument("detect_counts: negative photon count");
    }
    const double delta = (beam.angle_deg - basis.theta_deg) * kPi / 180.0;
    const double c = std::cos(delta);
    const double s = std::sin(delta);
    const long from_parallel = stream.binomial(beam.n_parallel, c * c);
    const long from_perpendicular = stream.binomial(beam.n_perpendicular, s * s);
    PhotonCounts counts;
    counts.n_r = from_parallel + from_perpendicular;
    counts.n_r_prime = beam.n_parallel + beam.n_perpendicular - counts.n_r;
    return counts;
}

PhotonCounts detect_counts(const fock::CountDistribution& pmf, rng::Stream& stream) {
    if (pmf.support.empty() || pmf.support.front().size() != 2) {
        throw std::invalid_argument("detect_counts: need a joint two-port pmf");
    }
    const std::size_t i = stream.categorical(pmf.probabilities);
    return {pmf.support[i][0], pmf.support[i][1]};
}

int decode(const PhotonCounts& counts, long threshold) {
    if (threshold < 1) throw std::invalid_argument("decode: threshold must be >= 1");
    return std::labs(counts.delta()) >= threshold ? 0 : 1;
}

long default_threshold(long m) {
    require_m(m);
    return (m + 2) / 2;
}

EncodeResult encode(EncoderSetting setting, const states::PairState& pair,
                    rng::Stream& stream) {
    if (setting.bit != 0 && setting.bit != 1) {
        throw std::invalid_argument("encode: bit must be 0 or 1");
    }
    if (pair.kind() == states::PairState::Kind::spdc && !pair.conditioned()) {
        const states::EventClass cls = sample_event_class(pair, stream);
        if (cls != states::EventClass::coincidence) {
            return NonCoincidenceEvent{cls};
        }
        const states::PairState coincident = pair.conditioned_on_coincidence();
        return measure_polarization(coincident, states::Party::sender, setting.basis(),
                                    stream);
    }
    return measure_polarization(pair, states::Party::sender, setting.basis(), stream);
}

}  // namespace entlink::devices
