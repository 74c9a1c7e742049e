#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace lsmc {

// SplitMix64 finalizer. Used both as the stream function and for key derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives a substream key from a root seed and a path of indices, e.g.
// derive_key(seed, {K, rep}) or derive_key(seed, {draw, attempt}).
constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t key = splitmix64(seed);
    for (std::uint64_t p : path) {
        key = splitmix64(key ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    }
    return key;
}

// Counter-based generator: the value at a counter depends only on (key, counter),
// so any draw can be regenerated independently of scheduling.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
        return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform on the open interval (0, 1).
    [[nodiscard]] constexpr double uniform(std::uint64_t counter) const noexcept {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
};

// Sequential standard-normal reader over one counter-based substream (Box-Muller).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t key) noexcept : rng_(key) {}

    double next() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.uniform(counter_++);
        const double u2 = rng_.uniform(counter_++);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double uniform() noexcept { return rng_.uniform(counter_++); }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lsmc
