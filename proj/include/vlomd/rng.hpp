#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace vlomd {

// SplitMix64 finalizer. Used for counter-based seed derivation so that the
// stream for (replicate r, role q) depends only on (base, r, q): adding
// replicates or roles never perturbs existing streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t key, std::uint64_t counter) {
    return splitmix64(key ^ splitmix64(counter + 0x632BE59BD9B4E019ULL));
}

// Stream roles for derive_seed(replicate_key, role). Kept in one place so the
// derivation scheme is auditable.
enum SeedRole : std::uint64_t {
    kSeedRoleEnv = 0,
    kSeedRoleSharedCertified = 1,
    kSeedRoleGameGen = 2,
    kSeedRoleWarmupShared = 3,
    kSeedRoleEval = 4,
    kSeedRoleAgentBase = 16,  // agent i uses kSeedRoleAgentBase + i
};

// mt19937_64 with hand-rolled draws. The engine's output sequence is fixed by
// the standard; the distributions in <random> are not, so we do not use them
// anywhere determinism matters.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform over {0, ..., n-1}.
    int uniform_int(int n) {
        if (n <= 0)
            throw std::invalid_argument("uniform_int: n must be positive");
        int v = static_cast<int>(uniform01() * n);
        return v < n ? v : n - 1;
    }

    // Draw from a probability vector by CDF inversion. The last positive
    // entry absorbs any rounding leftover.
    int categorical(std::span<const double> probs) {
        if (probs.empty())
            throw std::invalid_argument("categorical: empty probability vector");
        const double u = uniform01();
        double cum = 0.0;
        int last_positive = -1;
        for (std::size_t a = 0; a < probs.size(); ++a) {
            if (probs[a] > 0.0)
                last_positive = static_cast<int>(a);
            cum += probs[a];
            if (u < cum)
                return static_cast<int>(a);
        }
        if (last_positive < 0)
            throw std::invalid_argument("categorical: no positive mass");
        return last_positive;
    }

  private:
    std::mt19937_64 eng_;
};

// Neumaier compensated summation; normalization of probability vectors uses
// this so that renormalized rows sum to 1 at full double precision.
inline double compensated_sum(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace vlomd
