#include "entlink/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef __SIZEOF_INT128__
using uint128 = unsigned __int128;
#else
#error "a 128-bit integer type is required for the 64x64 multiply"
#endif

namespace entlink::rng {

namespace {

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t* hi) {
    const uint128 product = static_cast<uint128>(a) * b;
    *hi = static_cast<std::uint64_t>(product >> 64);
    return static_cast<std::uint64_t>(product);
}

inline std::array<std::uint64_t, 4> round_once(const std::array<std::uint64_t, 4>& ctr,
                                               const std::array<std::uint64_t, 2>& key) {
    std::uint64_t hi0 = 0;
    std::uint64_t hi1 = 0;
    const std::uint64_t lo0 = mulhilo(Philox4x64::kMul0, ctr[0], &hi0);
    const std::uint64_t lo1 = mulhilo(Philox4x64::kMul1, ctr[2], &hi1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint64_t, 4> Philox4x64::block(std::array<std::uint64_t, 4> counter,
                                               std::array<std::uint64_t, 2> key) {
    for (int r = 0; r < kRounds; ++r) {
        if (r != 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        counter = round_once(counter, key);
    }
    return counter;
}

Stream::Stream(std::uint64_t master_seed, std::uint64_t stream_id)
    : key_{master_seed, stream_id} {}

void Stream::refill() {
    // The counter advances before each block, so the first emitted block sits
    // at counter 1 -- the convention numpy's Philox generator uses, which
    // keeps whole streams bit-for-bit comparable against it.
    for (auto& word : counter_) {  // 256-bit little-endian increment
        if (++word != 0) break;
    }
    buffer_ = Philox4x64::block(counter_, key_);
    pos_ = 0;
}

std::uint64_t Stream::next_u64() {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
}

double Stream::uniform() {
    // Top 53 bits scaled into [0, 1); matches the usual uint64 -> double map.
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Stream::bit() {
    return static_cast<int>(next_u64() >> 63);
}

bool Stream::bernoulli(double p) {
    return uniform() < p;
}

long Stream::binomial(long n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: negative count");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial: p outside [0, 1]");
    long successes = 0;
    for (long i = 0; i < n; ++i) {
        successes += bernoulli(p) ? 1 : 0;
    }
    return successes;
}

std::size_t Stream::categorical(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("categorical: empty weight vector");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to zero");
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

CdfSampler::CdfSampler(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("CdfSampler: empty weight vector");
    cdf_.reserve(weights.size());
    double acc = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("CdfSampler: negative weight");
        acc += w;
        cdf_.push_back(acc);
    }
    total_ = acc;
    if (!(total_ > 0.0)) throw std::invalid_argument("CdfSampler: weights sum to zero");
}

std::size_t CdfSampler::sample(Stream& stream) const {
    const double u = stream.uniform() * total_;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

}  // namespace entlink::rng
