#pragma once

#include "entlink/fock.hpp"
#include "entlink/rng.hpp"
#include "entlink/states.hpp"

#include <Eigen/Dense>

#include <variant>
#include <vector>

namespace entlink::devices {

// Agreed encoding bases: bit 0 measures the sender photon at 0 degrees,
// bit 1 at 45 degrees.
struct EncoderSetting {
    int bit = 0;

    states::PolarizationBasis basis() const { return {bit == 0 ? 0.0 : 45.0}; }
};

enum class AmplifierKind { deterministic, urn, covariant };

const char* to_string(AmplifierKind kind);

// Receiver-side amplifier parameters.  The composition models (deterministic,
// urn) turn one photon into 3m+1; the covariant model is parameterized by the
// squeezer gain G, with m kept as the matched bookkeeping value (G = m + 1
// reproduces the composition models' mean parallel and perpendicular counts).
struct AmplifierModel {
    AmplifierKind kind = AmplifierKind::deterministic;
    long m = 0;
    double gain = 1.0;
    int n_max = 32;       // covariant only: photon-number cutoff per mode
    double leak_tol = 1e-8;

    static AmplifierModel deterministic(long m);
    static AmplifierModel urn(long m);
    static AmplifierModel covariant(long m, int n_max, double leak_tol = 1e-8);
    static AmplifierModel covariant_gain(double gain, int n_max, double leak_tol = 1e-8);

    long output_photons() const { return 3 * m + 1; }
};

// A classically composed amplified beam: photon counts along the beam
// polarization and orthogonal to it.
struct AmplifiedBeam {
    double angle_deg = 0.0;
    long n_parallel = 0;
    long n_perpendicular = 0;
};

// Analyzer port counts: n_r along the detection basis, n_r_prime orthogonal.
struct PhotonCounts {
    long n_r = 0;
    long n_r_prime = 0;

    long total() const { return n_r + n_r_prime; }
    long delta() const { return n_r - n_r_prime; }
};

// Fixed-composition amplifier: exactly 2m+1 photons parallel to the input
// polarization and m perpendicular.
AmplifiedBeam amplify_deterministic(double angle_deg, const AmplifierModel& model);

// Stimulated-emission urn: starting from the one input photon (parallel), add
// 3m photons one at a time, each parallel with probability
// (n_par + 1) / (n_par + n_perp + 2).  Mean composition matches the
// deterministic model: E[n_parallel] = 2m + 1.
AmplifiedBeam amplify_urn(double angle_deg, const AmplifierModel& model,
                          rng::Stream& stream);

// Exact distribution of the urn composition: element k is the probability of
// k parallel additions (so n_parallel = k + 1), for k = 0..3m.
std::vector<double> urn_composition_pmf(long m);

// Phase-insensitive amplifier built from one two-mode squeezer per
// polarization mode, both at the same gain and fed vacuum idlers.  Equal
// gains make the device commute with polarization rotations, so the joint
// analyzer-port count pmf only depends on the input's weight along the
// analyzer axes.  Computed on the truncated Fock space; the lost tail must
// stay within model.leak_tol.
class CovariantAmplifier {
  public:
    explicit CovariantAmplifier(const AmplifierModel& model);

    // Joint pmf of (n_r, n_r_prime) with the analyzer rotated to basis_deg.
    fock::CountDistribution count_pmf(const Eigen::Matrix2cd& input_density,
                                      double basis_deg = 0.0) const;
    fock::CountDistribution count_pmf(const states::Polarization& input,
                                      double basis_deg = 0.0) const;

    const AmplifierModel& model() const { return model_; }
    // Truncation loss of the worst single-mode branch.
    double leakage() const { return leakage_; }
    // Per-output-count weights for a branch carrying 0 or 1 input photons.
    const Eigen::VectorXd& branch_weights(int input_photons) const;

  private:
    AmplifierModel model_;
    Eigen::VectorXd diag0_, diag1_;
    double leakage_ = 0.0;
};

fock::CountDistribution amplify_covariant(const states::Polarization& input,
                                          const AmplifierModel& model,
                                          double basis_deg = 0.0);

// Split a composed beam across the analyzer ports: each photon lands in the
// parallel port with Malus-law probability cos^2 of its angle to the basis.
// Always consumes exactly beam.n_parallel + beam.n_perpendicular draws.
PhotonCounts detect_counts(const AmplifiedBeam& beam, states::PolarizationBasis basis,
                           rng::Stream& stream);

// Draw one joint count from a pmf already expressed in the analyzer basis
// (one uniform variate).
PhotonCounts detect_counts(const fock::CountDistribution& pmf, rng::Stream& stream);

// Decision rule: bit 0 iff |n_r - n_r_prime| >= threshold.
int decode(const PhotonCounts& counts, long threshold);

// ceil((m+1)/2), half the designed count separation of the bit-0 branch.
long default_threshold(long m);

struct NonCoincidenceEvent {
    states::EventClass event;
};

using EncodeResult = std::variant<states::MeasurementOutcome, NonCoincidenceEvent>;

// Sender-side step of one trial: draw the emission event class (for sources
// with bunching branches), condition on coincidence, and measure the sender
// photon in the basis agreed for the bit.
EncodeResult encode(EncoderSetting setting, const states::PairState& pair,
                    rng::Stream& stream);

}  // namespace entlink::devices
