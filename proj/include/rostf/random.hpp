#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rostf {

/// Portable random source, "rostf-rng v1".
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. The standard distributions are implementation-defined, so
/// the conversions are spelled out here instead:
///   uniform():  top 53 bits of one draw, scaled to [0, 1)
///   normal():   Box-Muller on two uniforms, the sine branch is discarded
///   index(n):   rejection sampling on the full 64-bit draw
/// Any change to these rules must bump the version string.
class Rng {
public:
    static constexpr const char* kVersion = "rostf-rng v1 (mt19937_64, box-muller)";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace rostf
