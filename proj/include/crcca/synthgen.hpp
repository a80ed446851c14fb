#pragma once

#include "crcca/dataset.hpp"

namespace crcca {

// Paired synthetic data: X uniform on the unit square, Y a one-to-one
// nonlinear map of X onto four quarter-circle arcs of the unit disk.
// Each X1-quartile feeds one quarter circle; within a quarter, samples
// are gathered toward one edge so each arc has a dense end.
struct SynthData {
    PairedDataset data;
    std::vector<int> quadrant;  // 0..3, by X1-quartile; 0 is the lower-left circle quarter
};

SynthData generate(std::int64_t n, std::uint64_t seed);

// The deterministic point map behind generate: x in [0,1]^2 to a point on
// one of the four quarter circles plus its quadrant index.
void synth_map(double x1, double x2, double& y1, double& y2, int& quadrant);

}  // namespace crcca
