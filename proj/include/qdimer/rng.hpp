#pragma once

#include <cstdint>

namespace qdimer {

/// Deterministic counter-based random stream. Each stream is keyed by
/// (master seed, stream index), so trajectory r always draws the same numbers
/// no matter which worker runs it or in which order.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : state_(mix(mix(master_seed + 0x9E3779B97F4A7C15ull) ^ mix(stream_index + 0xD1B54A32D192ED03ull))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform on (0, 1]; never returns exactly 0.
    double next_open_closed() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
};

}  // namespace qdimer
