#include "entlink/fock.hpp"

#include "entlink/errors.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <utility>

namespace entlink::fock {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Pair dimensions above this would make the dense rotation generator
// unreasonably large; photon-number-preserving use cases stay far below it.
constexpr std::size_t kMaxPairDim = 1024;

}  // namespace

// ---------------------------------------------------------------------------
// ModeLayout

ModeLayout::ModeLayout(std::vector<std::string> modes, int n_max)
    : modes_(std::move(modes)), n_max_(n_max) {
    if (modes_.empty()) throw std::invalid_argument("ModeLayout: no modes");
    if (n_max_ < 0) throw std::invalid_argument("ModeLayout: negative n_max");
    std::set<std::string> unique(modes_.begin(), modes_.end());
    if (unique.size() != modes_.size()) {
        throw std::invalid_argument("ModeLayout: duplicate mode name");
    }
    const std::size_t d = static_cast<std::size_t>(n_max_) + 1;
    dim_ = 1;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        if (dim_ > (static_cast<std::size_t>(1) << 31) / d) {
            throw std::invalid_argument("ModeLayout: basis dimension too large");
        }
        dim_ *= d;
    }
    strides_.assign(modes_.size(), 1);
    for (std::size_t k = modes_.size(); k-- > 1;) {
        strides_[k - 1] = strides_[k] * d;
    }
}

std::size_t ModeLayout::mode_index(std::string_view name) const {
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        if (modes_[k] == name) return k;
    }
    throw UnknownMode("unknown mode '" + std::string(name) + "'");
}

int ModeLayout::occupation(std::size_t basis_index, std::size_t mode) const {
    const std::size_t d = static_cast<std::size_t>(n_max_) + 1;
    return static_cast<int>((basis_index / strides_[mode]) % d);
}

std::vector<int> ModeLayout::occupations(std::size_t basis_index) const {
    std::vector<int> occ(modes_.size());
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        occ[k] = occupation(basis_index, k);
    }
    return occ;
}

std::size_t ModeLayout::index_of(std::span<const int> occupations) const {
    if (occupations.size() != modes_.size()) {
        throw std::invalid_argument("index_of: wrong occupation tuple length");
    }
    std::size_t index = 0;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        if (occupations[k] < 0 || occupations[k] > n_max_) {
            throw std::invalid_argument("index_of: occupation outside [0, n_max]");
        }
        index += static_cast<std::size_t>(occupations[k]) * strides_[k];
    }
    return index;
}

bool ModeLayout::operator==(const ModeLayout& other) const {
    return n_max_ == other.n_max_ && modes_ == other.modes_;
}

// ---------------------------------------------------------------------------
// FockStateVector

FockStateVector::FockStateVector(ModeLayout layout)
    : layout_(std::move(layout)),
      amplitudes_(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(layout_.dim()))) {}

FockStateVector FockStateVector::vacuum(ModeLayout layout) {
    FockStateVector state(std::move(layout));
    state.amplitudes_(0) = Complex(1.0, 0.0);
    return state;
}

FockStateVector FockStateVector::basis_state(ModeLayout layout,
                                             std::span<const int> occupations) {
    FockStateVector state(std::move(layout));
    state.amplitudes_(static_cast<Eigen::Index>(state.layout_.index_of(occupations))) =
        Complex(1.0, 0.0);
    return state;
}

Complex& FockStateVector::at(std::span<const int> occupations) {
    return amplitudes_(static_cast<Eigen::Index>(layout_.index_of(occupations)));
}

Complex FockStateVector::at(std::span<const int> occupations) const {
    return amplitudes_(static_cast<Eigen::Index>(layout_.index_of(occupations)));
}

FockStateVector FockStateVector::normalized() const {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("normalized: zero state");
    FockStateVector out(*this);
    out.amplitudes_ /= n;
    return out;
}

FockStateVector FockStateVector::operator+(const FockStateVector& other) const {
    if (layout_ != other.layout_) throw LayoutMismatch("adding states on different layouts");
    FockStateVector out(*this);
    out.amplitudes_ += other.amplitudes_;
    return out;
}

FockStateVector FockStateVector::operator-(const FockStateVector& other) const {
    if (layout_ != other.layout_) throw LayoutMismatch("subtracting states on different layouts");
    FockStateVector out(*this);
    out.amplitudes_ -= other.amplitudes_;
    return out;
}

FockStateVector FockStateVector::operator*(Complex scale) const {
    FockStateVector out(*this);
    out.amplitudes_ *= scale;
    return out;
}

Complex FockStateVector::inner(const FockStateVector& other) const {
    if (layout_ != other.layout_) throw LayoutMismatch("inner product across layouts");
    return amplitudes_.dot(other.amplitudes_);
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(ModeLayout layout)
    : layout_(std::move(layout)),
      matrix_(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(layout_.dim()),
                                     static_cast<Eigen::Index>(layout_.dim()))) {}

DensityOperator DensityOperator::from_pure(const FockStateVector& state) {
    DensityOperator rho(state.layout());
    rho.matrix_ = state.amplitudes() * state.amplitudes().adjoint();
    return rho;
}

void DensityOperator::accumulate(double weight, const FockStateVector& state) {
    if (layout_ != state.layout()) throw LayoutMismatch("accumulating across layouts");
    matrix_ += weight * (state.amplitudes() * state.amplitudes().adjoint());
}

double DensityOperator::trace_real() const {
    return matrix_.trace().real();
}

double DensityOperator::purity() const {
    return (matrix_ * matrix_).trace().real();
}

void DensityOperator::validate(double tol) const {
    const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > tol) throw std::runtime_error("density operator is not Hermitian");
    if (std::abs(trace_real() - 1.0) > tol) {
        throw std::runtime_error("density operator trace differs from one");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_,
                                                           Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tol) {
        throw std::runtime_error("density operator has a negative eigenvalue");
    }
}

// ---------------------------------------------------------------------------
// CountDistribution

double CountDistribution::total() const {
    double sum = 0.0;
    for (double p : probabilities) sum += p;
    return sum;
}

double CountDistribution::mean_occupation(std::size_t which) const {
    double mean = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        mean += probabilities[i] * support[i][which];
    }
    return mean;
}

double CountDistribution::marginal(std::size_t which, int n) const {
    double p = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (support[i][which] == n) p += probabilities[i];
    }
    return p;
}

// ---------------------------------------------------------------------------
// Operations

FockStateVector apply_ladder(const FockStateVector& state, std::string_view mode, Ladder kind) {
    const ModeLayout& layout = state.layout();
    const std::size_t m = layout.mode_index(mode);
    const std::size_t stride = layout.stride(m);
    const int n_max = layout.n_max();
    FockStateVector out(layout);
    const auto& in = state.amplitudes();
    auto& result = out.amplitudes();
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        const Complex amp = in(static_cast<Eigen::Index>(i));
        if (amp == Complex(0.0, 0.0)) continue;
        const int n = layout.occupation(i, m);
        if (kind == Ladder::creation) {
            if (n == n_max) {
                throw TruncationOverflow("creation operator would exceed n_max on mode '" +
                                         std::string(mode) + "'");
            }
            result(static_cast<Eigen::Index>(i + stride)) += std::sqrt(double(n + 1)) * amp;
        } else if (n > 0) {
            result(static_cast<Eigen::Index>(i - stride)) += std::sqrt(double(n)) * amp;
        }
    }
    return out;
}

namespace {

// Base indices whose occupation is zero on both listed modes; adding
// na * stride_a + nb * stride_b walks the (na, nb) sub-block.
std::vector<std::size_t> pair_block_offsets(const ModeLayout& layout, std::size_t ma,
                                            std::size_t mb) {
    std::vector<std::size_t> offsets;
    const std::size_t d = static_cast<std::size_t>(layout.n_max()) + 1;
    offsets.reserve(layout.dim() / (d * d));
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        if (layout.occupation(i, ma) == 0 && layout.occupation(i, mb) == 0) {
            offsets.push_back(i);
        }
    }
    return offsets;
}

struct PairModes {
    std::size_t ma;
    std::size_t mb;
    std::size_t sa;
    std::size_t sb;
    int d;
    std::vector<std::size_t> offsets;
};

PairModes resolve_pair(const ModeLayout& layout, std::string_view mode_a,
                       std::string_view mode_b) {
    PairModes pm;
    pm.ma = layout.mode_index(mode_a);
    pm.mb = layout.mode_index(mode_b);
    if (pm.ma == pm.mb) throw std::invalid_argument("the two modes must be distinct");
    pm.sa = layout.stride(pm.ma);
    pm.sb = layout.stride(pm.mb);
    pm.d = layout.n_max() + 1;
    pm.offsets = pair_block_offsets(layout, pm.ma, pm.mb);
    return pm;
}

// Unitary generated by theta * (a_h^dag a_v - a_v^dag a_h) on the pair space
// indexed p = n_h * d + n_v.  Number preserving, hence exactly unitary on the
// truncated space.
Eigen::MatrixXcd pair_rotation_unitary(int d, double theta_rad) {
    const std::size_t dim = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    if (dim > kMaxPairDim) {
        throw std::invalid_argument(
            "rotate_polarization: pair dimension too large for a dense rotation");
    }
    Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(d, d);
    for (int n = 1; n < d; ++n) {
        lower(n - 1, n) = std::sqrt(double(n));
    }
    const Eigen::MatrixXd raise = lower.transpose();
    const Eigen::MatrixXd generator = Eigen::kroneckerProduct(raise, lower).eval() -
                                      Eigen::kroneckerProduct(lower, raise).eval();
    const Eigen::MatrixXd unitary = (theta_rad * generator).exp();
    return unitary.cast<Complex>();
}

// The same few rotation angles recur once per trial in Monte Carlo loops, so
// memoize the dense exponentials.  Entries are immutable once published.
std::shared_ptr<const Eigen::MatrixXcd> cached_pair_rotation(int d, double theta_rad) {
    static std::mutex mutex;
    static std::map<std::pair<int, std::uint64_t>, std::shared_ptr<const Eigen::MatrixXcd>>
        cache;
    const auto key = std::make_pair(d, std::bit_cast<std::uint64_t>(theta_rad));
    std::lock_guard<std::mutex> lock(mutex);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() >= 256) cache.clear();
    auto value =
        std::make_shared<const Eigen::MatrixXcd>(pair_rotation_unitary(d, theta_rad));
    cache.emplace(key, value);
    return value;
}

// Apply a matrix acting on the (mode_a, mode_b) pair space to every sub-block
// of a full-layout vector.
void apply_pair_matrix(const PairModes& pm, const Eigen::MatrixXcd& op,
                       const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    const int d = pm.d;
    Eigen::VectorXcd block(d * d), image(d * d);
    for (std::size_t offset : pm.offsets) {
        for (int na = 0; na < d; ++na) {
            for (int nb = 0; nb < d; ++nb) {
                block(na * d + nb) =
                    in(static_cast<Eigen::Index>(offset + na * pm.sa + nb * pm.sb));
            }
        }
        image.noalias() = op * block;
        for (int na = 0; na < d; ++na) {
            for (int nb = 0; nb < d; ++nb) {
                out(static_cast<Eigen::Index>(offset + na * pm.sa + nb * pm.sb)) =
                    image(na * d + nb);
            }
        }
    }
}

}  // namespace

FockStateVector two_mode_squeeze(const FockStateVector& state, std::string_view mode_a,
                                 std::string_view mode_b, double r, double leak_tol) {
    const ModeLayout& layout = state.layout();
    if (r < 0.0) throw std::invalid_argument("two_mode_squeeze: negative squeeze parameter");
    if (leak_tol < 0.0) throw std::invalid_argument("two_mode_squeeze: negative leak_tol");
    if (r == 0.0) return state;
    const PairModes pm = resolve_pair(layout, mode_a, mode_b);
    const int d = pm.d;

    const double gamma = std::tanh(r);
    // exp(-g (N_a + N_b + 1)) with g = ln cosh r, i.e. sech(r)^(na + nb + 1).
    const double log_sech = -std::log(std::cosh(r));

    const double in_sq = state.squared_norm();
    FockStateVector out(layout);
    if (in_sq == 0.0) return out;

    const auto& in = state.amplitudes();
    auto& result = out.amplitudes();
    Eigen::MatrixXcd block(d, d), lowered(d, d), raised(d, d);
    for (std::size_t offset : pm.offsets) {
        for (int na = 0; na < d; ++na) {
            for (int nb = 0; nb < d; ++nb) {
                block(na, nb) = in(static_cast<Eigen::Index>(offset + na * pm.sa + nb * pm.sb));
            }
        }
        if (block.squaredNorm() == 0.0) continue;

        // Lowering factor exp(-gamma a b): finite sum, exact.
        lowered.setZero();
        for (int na = 0; na < d; ++na) {
            for (int nb = 0; nb < d; ++nb) {
                Complex acc(0.0, 0.0);
                double coeff = 1.0;
                for (int k = 0; na + k < d && nb + k < d; ++k) {
                    if (k > 0) {
                        coeff *= -gamma * std::sqrt(double(na + k) * double(nb + k)) / double(k);
                    }
                    acc += coeff * block(na + k, nb + k);
                }
                lowered(na, nb) = acc;
            }
        }

        // Diagonal factor, exact.
        for (int na = 0; na < d; ++na) {
            for (int nb = 0; nb < d; ++nb) {
                lowered(na, nb) *= std::exp(log_sech * double(na + nb + 1));
            }
        }

        // Raising factor exp(gamma a^dag b^dag), clipped at the cap; the clip
        // is the only place amplitude is discarded.
        raised.setZero();
        for (int na = 0; na < d; ++na) {
            for (int nb = 0; nb < d; ++nb) {
                Complex acc(0.0, 0.0);
                double coeff = 1.0;
                const int k_max = std::min(na, nb);
                for (int k = 0; k <= k_max; ++k) {
                    if (k > 0) {
                        coeff *= gamma * std::sqrt(double(na - k + 1) * double(nb - k + 1)) /
                                 double(k);
                    }
                    acc += coeff * lowered(na - k, nb - k);
                }
                raised(na, nb) = acc;
            }
        }

        for (int na = 0; na < d; ++na) {
            for (int nb = 0; nb < d; ++nb) {
                result(static_cast<Eigen::Index>(offset + na * pm.sa + nb * pm.sb)) =
                    raised(na, nb);
            }
        }
    }

    const double leaked = 1.0 - out.squared_norm() / in_sq;
    if (leaked > leak_tol) {
        throw LeakageExceeded(leaked, leak_tol, layout.n_max());
    }
    return out;
}

FockStateVector rotate_polarization(const FockStateVector& state, std::string_view mode_h,
                                    std::string_view mode_v, double theta_deg) {
    const PairModes pm = resolve_pair(state.layout(), mode_h, mode_v);
    const auto unitary = cached_pair_rotation(pm.d, theta_deg * kPi / 180.0);
    FockStateVector out(state.layout());
    apply_pair_matrix(pm, *unitary, state.amplitudes(), out.amplitudes());
    return out;
}

DensityOperator rotate_polarization(const DensityOperator& rho, std::string_view mode_h,
                                    std::string_view mode_v, double theta_deg) {
    const PairModes pm = resolve_pair(rho.layout(), mode_h, mode_v);
    const auto unitary_ptr = cached_pair_rotation(pm.d, theta_deg * kPi / 180.0);
    const Eigen::MatrixXcd& unitary = *unitary_ptr;
    DensityOperator out(rho.layout());
    Eigen::MatrixXcd work = rho.matrix();
    Eigen::VectorXcd column(work.rows()), image(work.rows());
    // U rho U^dag, applied column-wise and then row-wise via the adjoint.
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < work.cols(); ++j) {
            column = work.col(j);
            apply_pair_matrix(pm, unitary, column, image);
            work.col(j) = image;
        }
        work.adjointInPlace();
    }
    out.matrix() = work;
    return out;
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::string> keep) {
    const ModeLayout& layout = rho.layout();
    if (keep.empty()) throw std::invalid_argument("partial_trace: nothing kept");
    std::vector<bool> kept(layout.mode_count(), false);
    for (const std::string& name : keep) {
        const std::size_t m = layout.mode_index(name);
        if (kept[m]) throw std::invalid_argument("partial_trace: duplicate mode in keep list");
        kept[m] = true;
    }

    std::vector<std::string> kept_names;
    std::vector<std::size_t> kept_modes, traced_modes;
    for (std::size_t m = 0; m < layout.mode_count(); ++m) {
        if (kept[m]) {
            kept_names.push_back(layout.modes()[m]);
            kept_modes.push_back(m);
        } else {
            traced_modes.push_back(m);
        }
    }

    const ModeLayout reduced(kept_names, layout.n_max());
    DensityOperator out(reduced);
    if (traced_modes.empty()) {
        out.matrix() = rho.matrix();
        return out;
    }

    const std::size_t d = static_cast<std::size_t>(layout.n_max()) + 1;
    // Full-layout index offsets contributed by each reduced (resp. traced)
    // configuration; a full index is always one offset from each list.
    std::vector<std::size_t> kept_offsets(reduced.dim(), 0);
    for (std::size_t ir = 0; ir < reduced.dim(); ++ir) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < kept_modes.size(); ++k) {
            offset += static_cast<std::size_t>(reduced.occupation(ir, k)) *
                      layout.stride(kept_modes[k]);
        }
        kept_offsets[ir] = offset;
    }
    std::size_t traced_dim = 1;
    for (std::size_t k = 0; k < traced_modes.size(); ++k) traced_dim *= d;
    std::vector<std::size_t> traced_offsets(traced_dim, 0);
    for (std::size_t t = 0; t < traced_dim; ++t) {
        std::size_t rest = t;
        std::size_t offset = 0;
        for (std::size_t k = traced_modes.size(); k-- > 0;) {
            offset += (rest % d) * layout.stride(traced_modes[k]);
            rest /= d;
        }
        traced_offsets[t] = offset;
    }

    const auto& m_in = rho.matrix();
    auto& m_out = out.matrix();
    for (std::size_t ir = 0; ir < reduced.dim(); ++ir) {
        for (std::size_t jr = 0; jr < reduced.dim(); ++jr) {
            Complex acc(0.0, 0.0);
            for (std::size_t t = 0; t < traced_dim; ++t) {
                acc += m_in(static_cast<Eigen::Index>(kept_offsets[ir] + traced_offsets[t]),
                            static_cast<Eigen::Index>(kept_offsets[jr] + traced_offsets[t]));
            }
            m_out(static_cast<Eigen::Index>(ir), static_cast<Eigen::Index>(jr)) = acc;
        }
    }
    return out;
}

namespace {

// Reduced layout over the listed modes in the caller's order, plus the stride
// map from full indices to reduced indices.
struct Marginalizer {
    ModeLayout reduced;
    std::vector<std::size_t> full_modes;

    Marginalizer(const ModeLayout& layout, std::span<const std::string> modes)
        : reduced(make_reduced(layout, modes)) {
        for (const std::string& name : modes) {
            full_modes.push_back(layout.mode_index(name));
        }
    }

    static ModeLayout make_reduced(const ModeLayout& layout, std::span<const std::string> modes) {
        if (modes.empty()) throw std::invalid_argument("count_distribution: no modes listed");
        std::vector<std::string> names(modes.begin(), modes.end());
        for (const std::string& name : names) layout.mode_index(name);  // existence check
        return ModeLayout(names, layout.n_max());
    }

    std::size_t reduced_index(const ModeLayout& layout, std::size_t full_index) const {
        std::size_t index = 0;
        for (std::size_t k = 0; k < full_modes.size(); ++k) {
            index += static_cast<std::size_t>(layout.occupation(full_index, full_modes[k])) *
                     reduced.stride(k);
        }
        return index;
    }

    CountDistribution finish(std::vector<double> probabilities,
                             std::span<const std::string> modes) const {
        CountDistribution dist;
        dist.modes.assign(modes.begin(), modes.end());
        dist.support.reserve(reduced.dim());
        for (std::size_t i = 0; i < reduced.dim(); ++i) {
            dist.support.push_back(reduced.occupations(i));
        }
        dist.probabilities = std::move(probabilities);
        return dist;
    }
};

}  // namespace

CountDistribution count_distribution(const FockStateVector& state,
                                     std::span<const std::string> modes) {
    const Marginalizer marg(state.layout(), modes);
    std::vector<double> probs(marg.reduced.dim(), 0.0);
    const auto& amps = state.amplitudes();
    for (std::size_t i = 0; i < state.layout().dim(); ++i) {
        const double w = std::norm(amps(static_cast<Eigen::Index>(i)));
        if (w > 0.0) probs[marg.reduced_index(state.layout(), i)] += w;
    }
    return marg.finish(std::move(probs), modes);
}

CountDistribution count_distribution(const DensityOperator& rho,
                                     std::span<const std::string> modes) {
    const Marginalizer marg(rho.layout(), modes);
    std::vector<double> probs(marg.reduced.dim(), 0.0);
    const auto& m = rho.matrix();
    for (std::size_t i = 0; i < rho.layout().dim(); ++i) {
        probs[marg.reduced_index(rho.layout(), i)] +=
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    }
    return marg.finish(std::move(probs), modes);
}

}  // namespace entlink::fock
