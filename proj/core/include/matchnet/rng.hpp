#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace matchnet {

/// Counter-based random stream. A stream is identified by a 64-bit key
/// derived from (seed, replication, purpose, agent, ...); the n-th output is
/// a pure function of (key, n), so draws never depend on thread scheduling.
///
/// Output function: SplitMix64 finalizer applied to key + n * golden-gamma.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    /// Stream keyed by a sequence of identifiers, e.g. {seed, rep, purpose, agent}.
    static CounterRng keyed(std::initializer_list<std::uint64_t> ids) noexcept {
        return CounterRng(derive_key(ids));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(key_ + (counter_++ + 1) * kGamma); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    /// Uniform on (0, 1].
    double uniform_open_closed() noexcept { return 1.0 - uniform(); }
    /// Uniform integer in [0, n), n >= 1 (Lemire's unbiased multiply-shift).
    std::uint64_t below(std::uint64_t n) noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t position() const noexcept { return counter_; }

    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive_key(std::initializer_list<std::uint64_t> ids) noexcept {
        std::uint64_t h = 0x6a09e667f3bcc909ULL;
        for (auto id : ids) h = mix(h ^ mix(id + kGamma));
        return h;
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>((*this)()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace matchnet
