#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace entlink::fock {

using Complex = std::complex<double>;

// Named bosonic modes sharing one occupation cutoff.  Basis states are
// occupation tuples (n_0, ..., n_{K-1}) with 0 <= n_k <= n_max, flattened
// row-major: the first mode varies slowest, the last mode fastest.
class ModeLayout {
  public:
    ModeLayout(std::vector<std::string> modes, int n_max);

    int n_max() const { return n_max_; }
    std::size_t mode_count() const { return modes_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& modes() const { return modes_; }

    std::size_t mode_index(std::string_view name) const;  // throws UnknownMode
    std::size_t stride(std::size_t mode) const { return strides_[mode]; }

    int occupation(std::size_t basis_index, std::size_t mode) const;
    std::vector<int> occupations(std::size_t basis_index) const;
    std::size_t index_of(std::span<const int> occupations) const;

    bool operator==(const ModeLayout& other) const;
    bool operator!=(const ModeLayout& other) const { return !(*this == other); }

  private:
    std::vector<std::string> modes_;
    int n_max_;
    std::size_t dim_;
    std::vector<std::size_t> strides_;
};

// Complex amplitude vector over a ModeLayout basis.  Not forced to unit norm:
// intermediate expressions (ladder images, projections) are naturally
// unnormalized.
class FockStateVector {
  public:
    explicit FockStateVector(ModeLayout layout);

    static FockStateVector vacuum(ModeLayout layout);
    static FockStateVector basis_state(ModeLayout layout, std::span<const int> occupations);

    const ModeLayout& layout() const { return layout_; }
    Eigen::VectorXcd& amplitudes() { return amplitudes_; }
    const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }

    Complex& at(std::span<const int> occupations);
    Complex at(std::span<const int> occupations) const;

    double squared_norm() const { return amplitudes_.squaredNorm(); }
    double norm() const { return amplitudes_.norm(); }
    FockStateVector normalized() const;

    FockStateVector operator+(const FockStateVector& other) const;
    FockStateVector operator-(const FockStateVector& other) const;
    FockStateVector operator*(Complex scale) const;
    Complex inner(const FockStateVector& other) const;  // <this|other>

  private:
    ModeLayout layout_;
    Eigen::VectorXcd amplitudes_;
};

// Dense density operator over a ModeLayout basis.  Only meant for small
// layouts; the quadratic memory cost is the caller's problem.
class DensityOperator {
  public:
    explicit DensityOperator(ModeLayout layout);

    static DensityOperator from_pure(const FockStateVector& state);

    void accumulate(double weight, const FockStateVector& state);

    const ModeLayout& layout() const { return layout_; }
    Eigen::MatrixXcd& matrix() { return matrix_; }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }

    double trace_real() const;
    double purity() const;  // Tr(rho^2)

    // Hermiticity, unit trace, and positive spectrum, all within tol.
    void validate(double tol = 1e-10) const;

  private:
    ModeLayout layout_;
    Eigen::MatrixXcd matrix_;
};

// Joint photon-count distribution over a subset of modes.
struct CountDistribution {
    std::vector<std::string> modes;
    std::vector<std::vector<int>> support;  // occupation tuples, row-major order
    std::vector<double> probabilities;

    double total() const;
    double mean_occupation(std::size_t which) const;
    // Probability that mode `which` holds exactly n photons.
    double marginal(std::size_t which, int n) const;
};

enum class Ladder { creation, annihilation };

// Apply a^dag or a on one mode.  Creation from the truncation edge throws
// TruncationOverflow rather than silently dropping amplitude.
FockStateVector apply_ladder(const FockStateVector& state, std::string_view mode, Ladder kind);

// Two-mode squeeze exp(r (a^dag b^dag - a b)) projected onto the truncated
// space.  Uses the exact normal-ordered factorization
//   exp(G a^dag b^dag) exp(-g (N_a + N_b + 1)) exp(-G a b),
// with G = tanh r and g = ln cosh r: the lowering and diagonal factors are
// exact on the truncated space and the raising series is clipped at the cap,
// so the result equals the projection of the untruncated evolution.  The
// discarded squared norm (leakage) must stay within leak_tol or
// LeakageExceeded is thrown.
FockStateVector two_mode_squeeze(const FockStateVector& state, std::string_view mode_a,
                                 std::string_view mode_b, double r, double leak_tol = 1e-8);

// Rotate a polarization mode pair by theta (degrees): the new "h" mode picks
// up cos(theta) * h + sin(theta) * v, so a photon polarized at angle theta
// lands entirely in the rotated h mode (Malus's law in operator form).
// Exactly unitary on the truncated space (photon-number preserving).
FockStateVector rotate_polarization(const FockStateVector& state, std::string_view mode_h,
                                    std::string_view mode_v, double theta_deg);
DensityOperator rotate_polarization(const DensityOperator& rho, std::string_view mode_h,
                                    std::string_view mode_v, double theta_deg);

// Trace out every mode not listed in `keep` (result modes stay in layout
// order).
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::string> keep);

CountDistribution count_distribution(const FockStateVector& state,
                                     std::span<const std::string> modes);
CountDistribution count_distribution(const DensityOperator& rho,
                                     std::span<const std::string> modes);

}  // namespace entlink::fock
