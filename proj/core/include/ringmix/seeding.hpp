#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ringmix {

// Counter-based seed derivation. Every random stream in the toolkit is keyed
// by a tuple of integers (master seed, cell coordinates, learner, iteration...)
// folded through splitmix64, so adding a new key never shifts another stream.
std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

inline std::mt19937_64 make_stream(std::uint64_t seed) { return std::mt19937_64(seed); }

// Domain-separation tags so streams for different purposes never collide.
namespace stream_tag {
inline constexpr std::uint64_t kGradient = 0x67726164;  // "grad"
inline constexpr std::uint64_t kClock = 0x636c6f63;     // "cloc"
inline constexpr std::uint64_t kInit = 0x696e6974;      // "init"
inline constexpr std::uint64_t kOracle = 0x6f72636c;    // "orcl"
inline constexpr std::uint64_t kPermutation = 0x7065726d;  // "perm"
inline constexpr std::uint64_t kTrial = 0x7472696c;     // "tril"
}  // namespace stream_tag

}  // namespace ringmix
