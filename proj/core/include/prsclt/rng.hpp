#pragma once

#include <cstdint>
#include <limits>

namespace prsclt {

enum class Stream : std::uint64_t {
    train_design = 1,
    train_noise = 2,
    test_design = 3,
    test_noise = 4,
    panel_design = 5,
    effects = 6,
    test_point = 7,
    mask = 8,
};

std::uint64_t mix64(std::uint64_t x) noexcept;

// Key for one (replication, stream) pair. Distinct triples give statistically
// independent streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Stream tag) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag) noexcept;

// Counter-based generator: output k is mix64(key + k * golden). Satisfies
// UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    // Uniform on the open interval (0, 1).
    double uniform() noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace prsclt
