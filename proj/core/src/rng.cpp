#include "prsclt/rng.hpp"

namespace prsclt {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag) noexcept {
    std::uint64_t h = mix64(master + kGolden);
    h = mix64(h ^ (index + 0x632BE59BD9B4E019ULL));
    h = mix64(h ^ (tag * 0xD1B54A32D192ED03ULL));
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Stream tag) noexcept {
    return derive_seed(master, index, static_cast<std::uint64_t>(tag));
}

CounterRng::result_type CounterRng::operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
    // 53 random bits, shifted by half an ulp so 0 is never returned.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace prsclt
