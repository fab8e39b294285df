#include "entlink/states.hpp"

#include "entlink/errors.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace entlink::states {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;

// Beam-mode layout order; occupation tuples below follow it.
const std::array<const char*, 4> kBeamModes = {"sv", "sh", "iv", "ih"};

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

std::vector<std::string> beam_mode_names() {
    return {kBeamModes.begin(), kBeamModes.end()};
}

// Photons on the signal and idler side of a beam-basis state.
std::pair<int, int> side_totals(const fock::ModeLayout& layout, std::size_t index) {
    const int sv = layout.occupation(index, 0);
    const int sh = layout.occupation(index, 1);
    const int iv = layout.occupation(index, 2);
    const int ih = layout.occupation(index, 3);
    return {sv + sh, iv + ih};
}

EventClass classify(int signal_photons, int idler_photons) {
    if (signal_photons == 1 && idler_photons == 1) return EventClass::coincidence;
    if (idler_photons == 0) return EventClass::both_signal;
    return EventClass::both_idler;
}

}  // namespace

double PolarizationBasis::normalized_deg() const {
    double t = std::fmod(theta_deg, 180.0);
    if (t < 0.0) t += 180.0;
    return t;
}

Polarization Polarization::linear(double angle_deg) {
    const double t = deg_to_rad(angle_deg);
    return {fock::Complex(std::cos(t), 0.0), fock::Complex(std::sin(t), 0.0)};
}

double Polarization::squared_norm() const {
    return std::norm(amp_h) + std::norm(amp_v);
}

Polarization Polarization::normalized() const {
    const double n = std::sqrt(squared_norm());
    if (n == 0.0) throw std::invalid_argument("Polarization: zero amplitudes");
    return {amp_h / n, amp_v / n};
}

bool Polarization::is_linear(double tol) const {
    const Polarization p = normalized();
    // Strip the global phase of the dominant component; a linear state is
    // then real.
    const fock::Complex pivot =
        std::abs(p.amp_h) >= std::abs(p.amp_v) ? p.amp_h : p.amp_v;
    const fock::Complex phase = pivot / std::abs(pivot);
    return std::abs((p.amp_h / phase).imag()) <= tol &&
           std::abs((p.amp_v / phase).imag()) <= tol;
}

double Polarization::angle_deg(double tol) const {
    if (!is_linear(tol)) {
        throw std::invalid_argument("angle_deg: not a linear polarization");
    }
    const Polarization p = normalized();
    const fock::Complex pivot =
        std::abs(p.amp_h) >= std::abs(p.amp_v) ? p.amp_h : p.amp_v;
    const fock::Complex phase = pivot / std::abs(pivot);
    const double h = (p.amp_h / phase).real();
    const double v = (p.amp_v / phase).real();
    double angle = std::atan2(v, h) * 180.0 / kPi;
    if (angle < 0.0) angle += 180.0;
    if (angle >= 180.0) angle -= 180.0;
    return angle;
}

Eigen::Matrix2cd Polarization::density() const {
    const Polarization p = normalized();
    Eigen::Vector2cd ket;
    ket << p.amp_h, p.amp_v;
    return ket * ket.adjoint();
}

const char* to_string(EventClass cls) {
    switch (cls) {
        case EventClass::coincidence: return "coincidence";
        case EventClass::both_signal: return "both_signal";
        case EventClass::both_idler: return "both_idler";
    }
    return "?";
}

const char* to_string(Outcome outcome) {
    return outcome == Outcome::parallel ? "parallel" : "perpendicular";
}

// ---------------------------------------------------------------------------
// PairState

PairState PairState::bell_pair() {
    PairState pair(Kind::bell);
    pair.bell_ << kInvSqrt2, 0.0, 0.0, kInvSqrt2;  // (|hh> + |vv>)/sqrt(2)
    pair.conditioned_ = true;
    return pair;
}

PairState PairState::spdc_pair(int n_max) {
    if (n_max < 2) throw std::invalid_argument("spdc_pair: n_max must be at least 2");
    PairState pair(Kind::spdc);

    // Emission state 1/2 (b1^dag^2 + b2^dag^2)|0>.
    fock::ModeLayout source_layout({"b1", "b2"}, n_max);
    const auto vac_src = fock::FockStateVector::vacuum(source_layout);
    const auto b1_twice =
        apply_ladder(apply_ladder(vac_src, "b1", fock::Ladder::creation), "b1",
                     fock::Ladder::creation);
    const auto b2_twice =
        apply_ladder(apply_ladder(vac_src, "b2", fock::Ladder::creation), "b2",
                     fock::Ladder::creation);
    pair.source_ = (b1_twice + b2_twice) * fock::Complex(0.5, 0.0);

    // The beam splitter sends b1^dag -> (sv^dag + ih^dag)/sqrt(2) and
    // b2^dag -> (iv^dag - sh^dag)/sqrt(2): each source mode feeds the
    // vertical port of one beam and the horizontal port of the other.
    fock::ModeLayout beam_layout(beam_mode_names(), n_max);
    const auto vac = fock::FockStateVector::vacuum(beam_layout);
    const auto image_b1 = [&](const fock::FockStateVector& s) {
        return (apply_ladder(s, "sv", fock::Ladder::creation) +
                apply_ladder(s, "ih", fock::Ladder::creation)) *
               fock::Complex(kInvSqrt2, 0.0);
    };
    const auto image_b2 = [&](const fock::FockStateVector& s) {
        return (apply_ladder(s, "iv", fock::Ladder::creation) -
                apply_ladder(s, "sh", fock::Ladder::creation)) *
               fock::Complex(kInvSqrt2, 0.0);
    };
    pair.beams_ =
        (image_b1(image_b1(vac)) + image_b2(image_b2(vac))) * fock::Complex(0.5, 0.0);
    return pair;
}

PairState PairState::conditioned_on_coincidence() const {
    if (kind_ == Kind::bell) return *this;
    if (conditioned_) return *this;
    const auto& beams = *beams_;
    const auto& layout = beams.layout();
    PairState pair(Kind::spdc);
    pair.conditioned_ = true;
    fock::FockStateVector kept(layout);
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        const auto [s, r] = side_totals(layout, i);
        if (s == 1 && r == 1) {
            kept.amplitudes()(static_cast<Eigen::Index>(i)) =
                beams.amplitudes()(static_cast<Eigen::Index>(i));
        }
    }
    pair.beams_ = kept.normalized();
    return pair;
}

double PairState::event_probability(EventClass cls) const {
    if (kind_ == Kind::bell) {
        return cls == EventClass::coincidence ? 1.0 : 0.0;
    }
    const auto& beams = *beams_;
    const auto& layout = beams.layout();
    double p = 0.0;
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        const double w = std::norm(beams.amplitudes()(static_cast<Eigen::Index>(i)));
        if (w == 0.0) continue;
        const auto [s, r] = side_totals(layout, i);
        if (classify(s, r) == cls) p += w;
    }
    return p;
}

const Eigen::Vector4cd& PairState::bell_amplitudes() const {
    if (kind_ != Kind::bell) throw std::invalid_argument("not a bell pair");
    return bell_;
}

const fock::FockStateVector& PairState::source_state() const {
    if (!source_) {
        throw std::invalid_argument("no emission-mode representation for this state");
    }
    return *source_;
}

const fock::FockStateVector& PairState::beam_state() const {
    if (!beams_) throw std::invalid_argument("no beam-mode representation for a bell pair");
    return *beams_;
}

// ---------------------------------------------------------------------------
// Measurement

namespace {

struct BellBranches {
    double p_parallel;
    Polarization remote_parallel;
    Polarization remote_perpendicular;
};

BellBranches bell_branches(const Eigen::Vector4cd& psi, Party party, double theta_deg) {
    const double t = deg_to_rad(theta_deg);
    const double c = std::cos(t);
    const double s = std::sin(t);
    // psi is ordered (hh, hv, vh, vv) = (sender, receiver).
    fock::Complex par_h, par_v, perp_h, perp_v;
    if (party == Party::sender) {
        par_h = c * psi(0) + s * psi(2);
        par_v = c * psi(1) + s * psi(3);
        perp_h = -s * psi(0) + c * psi(2);
        perp_v = -s * psi(1) + c * psi(3);
    } else {
        par_h = c * psi(0) + s * psi(1);
        par_v = c * psi(2) + s * psi(3);
        perp_h = -s * psi(0) + c * psi(1);
        perp_v = -s * psi(2) + c * psi(3);
    }
    BellBranches b;
    b.p_parallel = std::norm(par_h) + std::norm(par_v);
    b.remote_parallel = Polarization{par_h, par_v};
    b.remote_perpendicular = Polarization{perp_h, perp_v};
    return b;
}

struct SideModes {
    const char* h;
    const char* v;
    const char* other_h;
    const char* other_v;
};

SideModes side_modes(Party party) {
    if (party == Party::sender) return {"sh", "sv", "ih", "iv"};
    return {"ih", "iv", "sh", "sv"};
}

}  // namespace

MeasurementOutcome measure_polarization(const PairState& pair, Party party,
                                        PolarizationBasis basis, rng::Stream& stream) {
    const double theta = basis.normalized_deg();
    double p_parallel = 0.0;
    Polarization remote_par, remote_perp;

    if (pair.kind() == PairState::Kind::bell) {
        const BellBranches b = bell_branches(pair.bell_amplitudes(), party, theta);
        p_parallel = b.p_parallel;
        remote_par = b.remote_parallel;
        remote_perp = b.remote_perpendicular;
    } else {
        const auto& beams = pair.beam_state();
        const auto& layout = beams.layout();
        const SideModes side = side_modes(party);
        const std::size_t mh = layout.mode_index(side.h);
        const std::size_t mv = layout.mode_index(side.v);

        double misfit = 0.0;
        for (std::size_t i = 0; i < layout.dim(); ++i) {
            const double w = std::norm(beams.amplitudes()(static_cast<Eigen::Index>(i)));
            if (w > 0.0 && layout.occupation(i, mh) + layout.occupation(i, mv) != 1) {
                misfit += w;
            }
        }
        if (misfit > 1e-12) {
            throw NotSingularlyOccupied(
                "measured side does not carry exactly one photon; condition on "
                "coincidence first");
        }

        // Rotate the measured pair of modes so the analyzer direction becomes
        // the new horizontal port; the remote side stays in the lab frame.
        const auto rotated = fock::rotate_polarization(beams, side.h, side.v, theta);
        const std::size_t oh = layout.mode_index(side.other_h);
        const std::size_t ov = layout.mode_index(side.other_v);

        fock::Complex par_h(0, 0), par_v(0, 0), perp_h(0, 0), perp_v(0, 0);
        double p_perp = 0.0;
        for (std::size_t i = 0; i < layout.dim(); ++i) {
            const fock::Complex amp = rotated.amplitudes()(static_cast<Eigen::Index>(i));
            if (amp == fock::Complex(0.0, 0.0)) continue;
            const int nh = layout.occupation(i, mh);
            const int nv = layout.occupation(i, mv);
            const int roh = layout.occupation(i, oh);
            const int rov = layout.occupation(i, ov);
            if (nh == 1 && nv == 0) {
                p_parallel += std::norm(amp);
                if (roh == 1 && rov == 0) par_h += amp;
                if (roh == 0 && rov == 1) par_v += amp;
            } else if (nh == 0 && nv == 1) {
                p_perp += std::norm(amp);
                if (roh == 1 && rov == 0) perp_h += amp;
                if (roh == 0 && rov == 1) perp_v += amp;
            }
        }
        const double total = p_parallel + p_perp;
        p_parallel = total > 0.0 ? p_parallel / total : 0.0;
        remote_par = Polarization{par_h, par_v};
        remote_perp = Polarization{perp_h, perp_v};
    }

    MeasurementOutcome out;
    if (stream.uniform() < p_parallel) {
        out.outcome = Outcome::parallel;
        out.probability = p_parallel;
        out.collapsed_remote = remote_par.normalized();
    } else {
        out.outcome = Outcome::perpendicular;
        out.probability = 1.0 - p_parallel;
        out.collapsed_remote = remote_perp.normalized();
    }
    return out;
}

EventClass sample_event_class(const PairState& pair, rng::Stream& stream) {
    const double u = stream.uniform();
    const double p_c = pair.event_probability(EventClass::coincidence);
    const double p_s = pair.event_probability(EventClass::both_signal);
    if (u < p_c) return EventClass::coincidence;
    if (u < p_c + p_s) return EventClass::both_signal;
    return EventClass::both_idler;
}

double double_detection_amplitude(const PairState& pair, Beam beam) {
    if (pair.kind() == PairState::Kind::bell) {
        throw std::invalid_argument(
            "double detection is defined on the emission state, not on a bell pair");
    }
    const auto& source = pair.source_state();
    // Beam annihilation components over the source modes: the signal beam is
    // (b1 e_v - b2 e_h)/sqrt(2) and the idler beam (b2 e_v + b1 e_h)/sqrt(2).
    struct Component {
        const char* mode;
        double sign;
    };
    const std::array<Component, 2> comps =
        beam == Beam::signal ? std::array<Component, 2>{{{"b1", 1.0}, {"b2", -1.0}}}
                             : std::array<Component, 2>{{{"b2", 1.0}, {"b1", 1.0}}};
    fock::FockStateVector acc(source.layout());
    for (const auto& c : comps) {
        const auto twice = apply_ladder(apply_ladder(source, c.mode, fock::Ladder::annihilation),
                                        c.mode, fock::Ladder::annihilation);
        acc = acc + twice * fock::Complex(0.5 * c.sign * c.sign, 0.0);
    }
    return acc.squared_norm();
}

double correlation(const PairState& pair, double theta_s_deg, double theta_r_deg) {
    double joint[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // [sender branch][receiver branch]

    if (pair.kind() == PairState::Kind::bell) {
        const auto& psi = pair.bell_amplitudes();
        const double ts = deg_to_rad(theta_s_deg);
        const double tr = deg_to_rad(theta_r_deg);
        const double us[2][2] = {{std::cos(ts), std::sin(ts)},
                                 {-std::sin(ts), std::cos(ts)}};
        const double ur[2][2] = {{std::cos(tr), std::sin(tr)},
                                 {-std::sin(tr), std::cos(tr)}};
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const fock::Complex amp = us[a][0] * ur[b][0] * psi(0) +
                                          us[a][0] * ur[b][1] * psi(1) +
                                          us[a][1] * ur[b][0] * psi(2) +
                                          us[a][1] * ur[b][1] * psi(3);
                joint[a][b] = std::norm(amp);
            }
        }
    } else {
        const auto& beams = pair.beam_state();
        const auto rotated = fock::rotate_polarization(
            fock::rotate_polarization(beams, "sh", "sv", theta_s_deg), "ih", "iv",
            theta_r_deg);
        // Coincidence patterns in the rotated frames; occupations follow the
        // (sv, sh, iv, ih) layout order.
        const auto amp_at = [&](int sh, int sv, int ih, int iv) {
            const std::array<int, 4> occ = {sv, sh, iv, ih};
            return rotated.at(occ);
        };
        joint[0][0] = std::norm(amp_at(1, 0, 1, 0));
        joint[0][1] = std::norm(amp_at(1, 0, 0, 1));
        joint[1][0] = std::norm(amp_at(0, 1, 1, 0));
        joint[1][1] = std::norm(amp_at(0, 1, 0, 1));
    }

    const double total = joint[0][0] + joint[0][1] + joint[1][0] + joint[1][1];
    if (total <= 0.0) throw std::runtime_error("correlation: no coincidence support");
    return (joint[0][0] + joint[1][1] - joint[0][1] - joint[1][0]) / total;
}

double chsh_value(const PairState& pair, const ChshAngles& angles) {
    return correlation(pair, angles.a_deg, angles.b_deg) -
           correlation(pair, angles.a_deg, angles.b_prime_deg) +
           correlation(pair, angles.a_prime_deg, angles.b_deg) +
           correlation(pair, angles.a_prime_deg, angles.b_prime_deg);
}

}  // namespace entlink::states
