#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace entlink::rng {

// Philox4x64 keyed counter permutation, ten rounds.  Bit-compatible with
// numpy.random.Philox: the same (counter, key) yields the same four words.
struct Philox4x64 {
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
    static constexpr int kRounds = 10;

    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> counter,
                                              std::array<std::uint64_t, 2> key);
};

// One random stream per (master_seed, stream_id) pair.  The pair is the Philox
// key and the 256-bit block counter starts at zero, so distinct ids give
// non-overlapping streams and a stream's output depends only on the pair and
// on how many values have been drawn -- never on other streams or on thread
// scheduling.
class Stream {
  public:
    Stream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t next_u64();

    // Uniform double in [0, 1) with 53-bit resolution (top bits of one word).
    double uniform();

    int bit();  // fair coin, 0 or 1
    bool bernoulli(double p);

    // Sum of n Bernoulli(p) draws.  Always consumes exactly n words, which
    // keeps downstream draw positions independent of the outcome.
    long binomial(long n, double p);

    // Index into an unnormalized probability vector (linear walk).
    std::size_t categorical(std::span<const double> weights);

    std::uint64_t master_seed() const { return key_[0]; }
    std::uint64_t stream_id() const { return key_[1]; }

  private:
    void refill();

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_{};
    std::array<std::uint64_t, 4> buffer_{};
    int pos_ = 4;
};

// Inverse-CDF sampler for a fixed weight vector, for pmfs that are sampled
// many times.  Weights need not sum to one; draws are conditional on the
// represented support.
class CdfSampler {
  public:
    explicit CdfSampler(std::span<const double> weights);

    std::size_t sample(Stream& stream) const;
    double total() const { return total_; }

  private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

}  // namespace entlink::rng
