#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace geoneg {

// Deterministic RNG wrapper. mt19937_64 output is pinned by the standard;
// the derived draws below avoid std::uniform_*_distribution, whose results
// are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) { return engine_() % n; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(uniform_index(items.size()))];
    }

private:
    std::mt19937_64 engine_;
};

// 9-significant-digit formatting used by the scene DSL and JSON corpora.
// Keeps trailing zeros ("5.00000000") so canonical texts are byte-stable.
std::string format_number_fixed9(double value);

// 9-significant-digit formatting with trailing zeros trimmed ("5", "60").
// Used by caption templates.
std::string format_number_trim9(double value);

// Round-trips a value through the canonical 9-digit text form. Generator
// outputs are quantized with this so parse(serialize(scene)) is exact.
double quantize9(double value);

// FNV-1a 64-bit, the pinned hash behind hashed bag-of-tokens text features.
std::uint64_t fnv1a64(const std::string& token);

// Error with an exit-code class: usage errors map to exit 2, runtime to 1.
class Error : public std::runtime_error {
public:
    enum class Kind { usage, runtime };

    Error(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

    static Error usage(const std::string& message) { return Error(Kind::usage, message); }
    static Error runtime(const std::string& message) { return Error(Kind::runtime, message); }

private:
    Kind kind_;
};

}  // namespace geoneg
