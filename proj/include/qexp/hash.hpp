#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace qexp {

/// 64-bit FNV-1a. Stable across platforms, used for cache and cassette keys.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = 0xcbf29ce484222325ULL) noexcept
{
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

inline std::string content_hash(std::string_view data) { return hex64(fnv1a64(data)); }

/// splitmix64 step; derives independent seeds from one user seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace qexp
