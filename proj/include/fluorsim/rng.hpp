#pragma once

#include <cstdint>

namespace fluorsim {

// Counter-based generator built on the SplitMix64 finalizer. Every draw is a
// pure function of (key, counter), so per-window and per-sample substreams
// reproduce bit-identically regardless of evaluation order or thread count.
// Streams are derived by fork(), which remixes the key with a stream id.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6A09E667F3BCC909ull)) {}

    // Independent substream; fork(id) on equal state always yields the same
    // stream. Forks of forks are well-defined.
    Rng fork(std::uint64_t stream_id) const {
        Rng r(*this);
        r.key_ = mix(key_ ^ mix(stream_id ^ 0xBB67AE8584CAA73Bull));
        r.counter_ = 0;
        return r;
    }

    // Draw at an explicit counter without touching sequential state.
    double uniform_at(std::uint64_t counter) const {
        return to_unit(word_at(counter));
    }

    bool bernoulli_at(std::uint64_t counter, double p) const {
        return uniform_at(counter) < p;
    }

    // Sequential draws; next() == uniform_at(0) on a fresh stream.
    double next() { return uniform_at(counter_++); }
    std::uint64_t next_u64() { return word_at(counter_++); }

private:
    std::uint64_t word_at(std::uint64_t counter) const {
        return mix(key_ + 0x9E3779B97F4A7C15ull * (counter + 1));
    }

    static double to_unit(std::uint64_t x) {
        return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0, 1)
    }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace fluorsim
