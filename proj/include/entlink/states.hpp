#pragma once

#include "entlink/fock.hpp"
#include "entlink/rng.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace entlink::states {

// Linear polarizer / analyzer orientation in degrees.
struct PolarizationBasis {
    double theta_deg = 0.0;

    // Angle folded into [0, 180); a polarizer at theta and theta + 180 is the
    // same device.
    double normalized_deg() const;
};

// Single-photon polarization amplitudes over the (h, v) basis.
struct Polarization {
    fock::Complex amp_h{1.0, 0.0};
    fock::Complex amp_v{0.0, 0.0};

    static Polarization linear(double angle_deg);

    double squared_norm() const;
    Polarization normalized() const;

    // True when the state is a linear polarization (real amplitude ratio) up
    // to a global phase.
    bool is_linear(double tol = 1e-9) const;
    // Orientation in [0, 180); throws std::invalid_argument for elliptical
    // states.
    double angle_deg(double tol = 1e-9) const;

    // Normalized 2x2 density matrix in the (h, v) basis.
    Eigen::Matrix2cd density() const;
};

enum class Party { sender, receiver };
enum class Beam { signal, idler };
enum class Outcome { parallel, perpendicular };
enum class EventClass { coincidence, both_signal, both_idler };

const char* to_string(EventClass cls);
const char* to_string(Outcome outcome);

struct MeasurementOutcome {
    Outcome outcome = Outcome::parallel;
    double probability = 0.0;        // branch probability of this outcome
    Polarization collapsed_remote;   // post-measurement remote photon, normalized
};

// A polarization-entangled photon pair shared between a sender and a
// receiver.
//
// Two preparations are supported.  `bell_pair` is the ideal two-qubit pair
// (|hh> + |vv>)/sqrt(2), one photon per party by construction.  `spdc_pair`
// is the two-photon emission state 1/2 (b1^dag^2 + b2^dag^2)|0>: an equal
// superposition of double emission into each source mode, carried through a
// beam splitter into signal and idler output modes.  Only half of those
// events put one photon on each side; the rest bunch both photons into one
// beam, and a coincidence filter is what recovers an entangled (singlet)
// pair.
class PairState {
  public:
    enum class Kind { bell, spdc };

    static PairState bell_pair();
    static PairState spdc_pair(int n_max = 2);

    Kind kind() const { return kind_; }
    bool conditioned() const { return conditioned_; }

    // The coincidence branch as a pair state of its own (spdc only; bell
    // pairs are already coincident).
    PairState conditioned_on_coincidence() const;

    double event_probability(EventClass cls) const;

    // Amplitudes over (sender pol, receiver pol) as (hh, hv, vh, vv); bell
    // kind only.
    const Eigen::Vector4cd& bell_amplitudes() const;
    // Emission-mode representation over modes {b1, b2}; unconditioned spdc
    // only.
    const fock::FockStateVector& source_state() const;
    // Beam-mode representation over modes {sv, sh, iv, ih}; spdc only.
    const fock::FockStateVector& beam_state() const;

  private:
    explicit PairState(Kind kind) : kind_(kind) {}

    Kind kind_;
    bool conditioned_ = false;
    Eigen::Vector4cd bell_ = Eigen::Vector4cd::Zero();
    std::optional<fock::FockStateVector> source_;
    std::optional<fock::FockStateVector> beams_;
};

// Project one party's photon onto the basis direction (parallel) or its
// orthogonal complement (perpendicular), drawing the branch with one uniform
// variate, and collapse the remote photon accordingly.  The measured side
// must carry exactly one photon (NotSingularlyOccupied otherwise), so raw
// spdc pairs must be conditioned on coincidence first.
MeasurementOutcome measure_polarization(const PairState& pair, Party party,
                                        PolarizationBasis basis, rng::Stream& stream);

// Which detector pattern this emission produces, drawn with one uniform
// variate.
EventClass sample_event_class(const PairState& pair, rng::Stream& stream);

// Squared norm after annihilating two photons out of one beam (the
// double-detection channel): ||(A_beam . A_beam)|psi>||^2 on the emission
// state.  Equals 1 for the spdc pair on both beams and 0 for a
// one-photon-per-beam product state.
double double_detection_amplitude(const PairState& pair, Beam beam);

// Polarization correlation E(theta_s, theta_r) restricted to coincidence
// events: P(same outcome) - P(opposite outcome) with both analyzers fixed.
double correlation(const PairState& pair, double theta_s_deg, double theta_r_deg);

struct ChshAngles {
    double a_deg = 0.0;
    double b_deg = 22.5;
    double a_prime_deg = 45.0;
    double b_prime_deg = 67.5;
};

// CHSH combination S = E(a,b) - E(a,b') + E(a',b) + E(a',b').
double chsh_value(const PairState& pair, const ChshAngles& angles);

}  // namespace entlink::states
