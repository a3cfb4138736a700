#pragma once

#include <cstdint>

#include "events.hpp"
#include "intensity.hpp"
#include "rng.hpp"

namespace tpp {

// dominating-rate ceiling for thinning; beyond this the draw loop refuses
inline constexpr double kMaxDominatingRate = 1e6;

// One exact draw on [0, window_end).  Linear / piecewise-linear / Hawkes /
// sum intensities run Ogata-style thinning with a dominating rate refreshed
// after every candidate and at every breakpoint; the self-correcting model
// inverts its compensator in closed form instead.  Self-correcting terms
// inside a Sum are not supported.
EventSequence simulate(const IntensitySpec& spec, double window_end,
                       RngStream& rng);

// n independent draws; sequence i consumes stream (seed, i), so results are
// reproducible and independent of the thread count.
Dataset simulate_dataset(const IntensitySpec& spec, double window_end,
                         std::size_t n, std::uint64_t seed, int threads = 1);

}  // namespace tpp
