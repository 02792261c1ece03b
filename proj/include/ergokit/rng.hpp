#pragma once

#include <cstdint>

namespace ergo {

// splitmix64: deterministic across platforms, used both as the trial RNG and
// to derive independent per-trial streams from the single run seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [lo, hi], unbiased via rejection
    long long range(long long lo, long long hi) {
        std::uint64_t span = (std::uint64_t)(hi - lo) + 1;
        if (span == 0) return (long long)next(); // full 64-bit range
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v;
        do { v = next(); } while (v >= limit);
        return lo + (long long)(v % span);
    }

    bool chance(std::uint32_t num, std::uint32_t den) {
        return (std::uint64_t)range(0, den - 1) < num;
    }

    Rng fork(std::uint64_t stream) {
        Rng r(state_ ^ (0xd1342543de82ef95ULL * (stream + 1)));
        r.next();
        return r;
    }

private:
    std::uint64_t state_;
};

} // namespace ergo
