#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rsm/representation.hpp"

namespace rsm {

struct SimStep {
    Symbol symbol = 0;
    std::optional<std::uint64_t> lookback;  // drawn look-back distance, absent for plain chains

    bool operator==(const SimStep&) const = default;
};

struct SimOptions {
    std::size_t length = 0;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;  // must cover the longest table context (or the chain order)
};

/// Uniform double in [0,1) from the top 53 bits of one generator draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Runs the coupled (symbol, look-back) process. The initial past is uniform.
template <class T>
std::vector<SimStep> simulate(const CompleteRMP<T>& source, const SimOptions& opts);

template <class T>
std::vector<SimStep> simulate(const MarkovOrderM<T>& source, const SimOptions& opts);

struct PathSummary {
    std::vector<double> symbol_freq;
    std::vector<std::pair<std::uint64_t, double>> lookback_freq;  // sorted by depth
};

PathSummary summarize(const std::vector<SimStep>& path, std::size_t alphabet_size);

}  // namespace rsm
