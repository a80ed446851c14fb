#include "crcca/synthgen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "crcca/rng.hpp"

namespace crcca {

namespace {

// Pipeline for the base (lower-left) quarter: w in [0,1]^2 -> y on the
// lower-left quarter circle. w1 is spread over the full square, samples
// with w2 > 0.2 are gathered into the left strip, the square is shifted
// to [-1,0]^2, and the square is mapped onto the disk.
void base_quarter(double w1, double w2, double& y1, double& y2) {
    double z1 = w1;
    double z2 = w2;
    if (z2 > 0.2) z1 *= 0.2;
    z1 -= 1.0;
    z2 -= 1.0;
    y1 = z1 * std::sqrt(1.0 - 0.5 * z2 * z2);
    y2 = z2 * std::sqrt(1.0 - 0.5 * z1 * z1);
}

}  // namespace

void synth_map(double x1, double x2, double& y1, double& y2, int& quadrant) {
    const int q = std::min(3, static_cast<int>(x1 * 4.0));
    const double w1 = 4.0 * x1 - q;  // position within the quartile
    double b1 = 0.0, b2 = 0.0;
    base_quarter(w1, x2, b1, b2);
    // The other quartiles are mirror images of the base arc: across the
    // horizontal axis, the vertical axis, and the anti-diagonal. Mirrors
    // rather than plain rotations keep part of the within-arc position
    // linearly visible from x2 across the whole disk.
    switch (q) {
        case 0: y1 = b1;  y2 = b2;  break;   // lower left
        case 1: y1 = b1;  y2 = -b2; break;   // upper left
        case 2: y1 = -b1; y2 = b2;  break;   // lower right
        default: y1 = -b2; y2 = -b1; break;  // upper right
    }
    quadrant = q;
}

SynthData generate(std::int64_t n, std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("generate: n must be >= 1");
    }
    SynthData out;
    out.data.x.resize(n, 2);
    out.data.y.resize(n, 2);
    out.quadrant.resize(static_cast<std::size_t>(n));
    std::mt19937_64 gen(seed);
    for (std::int64_t i = 0; i < n; ++i) {
        const double x1 = uniform_unit(gen);
        const double x2 = uniform_unit(gen);
        double y1 = 0.0, y2 = 0.0;
        int q = 0;
        synth_map(x1, x2, y1, y2, q);
        out.data.x(i, 0) = x1;
        out.data.x(i, 1) = x2;
        out.data.y(i, 0) = y1;
        out.data.y(i, 1) = y2;
        out.quadrant[static_cast<std::size_t>(i)] = q;
    }
    out.data.x_names = {"x1", "x2"};
    out.data.y_names = {"y1", "y2"};
    return out;
}

}  // namespace crcca
