#pragma once

#include "asg/planner.hpp"
#include "asg/world.hpp"

#include <cstdint>
#include <string>

namespace asg {

enum class WorldFamily {
    apartment, // dense: multiple rooms, ~100-130 small objects
    room,      // simple: one room, ~20-30 larger furnishings
};

WorldFamily worldFamilyFromName(const std::string& name); // throws ValidationError
const char* worldFamilyName(WorldFamily family);

/// Deterministic procedural world: identical (family, seed) pairs produce
/// identical WorldSpecs. Every world ships three external cameras; cam_0 is
/// an overhead view.
WorldSpec generateWorld(WorldFamily family, std::uint64_t seed);

/// Completion prior matched to the generator's label statistics, including
/// strong co-occurrence between small items and their supporting furniture.
CompletionPrior benchmarkPrior(WorldFamily family);

} // namespace asg
