#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "swarm/world.hpp"

namespace swarm {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Little-endian binary image of the complete world state. Byte-identical
/// for equal worlds; the thread count is not part of the state.
std::string save_snapshot(const World& world);
World load_snapshot(std::string_view bytes);

/// FNV-1a 64 over the step count and the canonical particle records.
std::uint64_t state_hash(const World& world);

std::string to_hex(std::string_view bytes);
std::string from_hex(std::string_view hex);

}  // namespace swarm
