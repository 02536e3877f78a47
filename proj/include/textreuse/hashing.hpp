#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace textreuse {

// MurmurHash64A over arbitrary bytes.
std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed = 0) noexcept;

// 64-bit finalizer (bijective avalanche mix).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

// SplitMix64 step; advances state and returns the next output.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Uuid = std::array<std::uint8_t, 16>;

// Name-based UUID (version 5, SHA-1).
Uuid uuid_v5(const Uuid& name_space, std::string_view name);
std::string to_string(const Uuid& uuid);

} // namespace textreuse
