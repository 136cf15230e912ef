#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Philox4x32-10 counter-based generator. Each (key, counter) pair maps to an
// independent 128-bit block, so parallel path simulation needs no generator
// state: the counter encodes (path, component, step) and any worker can ask
// for any draw directly. Constants are the usual Philox round keys.
namespace wzw::philox {

inline constexpr uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr uint32_t kMult0 = 0xD2511F53u;
inline constexpr uint32_t kMult1 = 0xCD9E8D57u;

inline std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const uint64_t p0 = static_cast<uint64_t>(kMult0) * ctr[0];
        const uint64_t p1 = static_cast<uint64_t>(kMult1) * ctr[2];
        const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
        const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

// Two uniforms in (0,1) from one block, 53-bit mantissas.
inline std::array<double, 2> uniforms(uint64_t seed, uint64_t stream, uint32_t lane, uint32_t step) {
    const std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(stream),
                                         static_cast<uint32_t>(stream >> 32), lane, step};
    const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed),
                                         static_cast<uint32_t>(seed >> 32)};
    const auto b = block(ctr, key);
    const uint64_t w0 = (static_cast<uint64_t>(b[1]) << 32 | b[0]) >> 11;
    const uint64_t w1 = (static_cast<uint64_t>(b[3]) << 32 | b[2]) >> 11;
    constexpr double scale = 1.0 / 9007199254740992.0; // 2^-53
    return {(static_cast<double>(w0) + 0.5) * scale, (static_cast<double>(w1) + 0.5) * scale};
}

// Standard normal draw, Box-Muller on the block's two uniforms. One draw per
// (seed, stream, lane, step) so replay never depends on call order.
inline double gaussian(uint64_t seed, uint64_t stream, uint32_t lane, uint32_t step) {
    const auto u = uniforms(seed, stream, lane, step);
    return std::sqrt(-2.0 * std::log(u[0])) * std::cos(6.283185307179586476925286766559 * u[1]);
}

} // namespace wzw::philox
