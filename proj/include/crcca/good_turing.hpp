#pragma once

#include <cstdint>
#include <map>

namespace crcca {

// Simple Good-Turing (Gale-Sampson) smoothed distribution over observed
// symbols, plus the unseen (missing) mass. Observed probabilities sum to
// 1 - missing_mass.
struct GoodTuringEstimate {
    std::map<std::int64_t, std::int64_t> counts;
    std::map<std::int64_t, std::int64_t> count_of_counts;  // r -> N_r
    std::map<std::int64_t, double> probability;            // per observed symbol
    double missing_mass = 0.0;  // N_1 / n
    std::int64_t total = 0;
};

// Smoothed count r* = (r+1) S(r+1)/S(r) with S a log-log regression through
// the Z-transformed counts-of-counts; Turing estimates (r+1) N_{r+1}/N_r are
// used for small r until they stop differing significantly from the smooth,
// then the smooth takes over. With a single distinct count value there is
// nothing to regress on and the empirical frequencies are kept.
GoodTuringEstimate good_turing(const std::map<std::int64_t, std::int64_t>& counts);

// Plug-in entropy of the observed symbols only; the missing mass carries no
// symbols to sum over and is reported separately in the estimate.
double entropy_bits(const GoodTuringEstimate& est);

}  // namespace crcca
