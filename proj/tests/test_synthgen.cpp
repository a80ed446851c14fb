#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "crcca/synthgen.hpp"

using namespace crcca;

TEST_SUITE("synthgen") {

// Hand-evaluated points of the base (lower-left) branch, frozen from an
// independent scripted evaluation of the same formulas.
TEST_CASE("base branch reference points") {
    double y1, y2;
    int q;
    synth_map(0.1, 0.3, y1, y2, q);  // gathered case, x2 > 0.2
    CHECK_EQ(q, 0);
    CHECK_EQ(y1, doctest::Approx(-0.7993947710612073).epsilon(1e-12));
    CHECK_EQ(y2, doctest::Approx(-0.5316314512893308).epsilon(1e-12));

    synth_map(0.05, 0.1, y1, y2, q);  // spread case, x2 <= 0.2
    CHECK_EQ(q, 0);
    CHECK_EQ(y1, doctest::Approx(-0.6170899448216605).epsilon(1e-12));
    CHECK_EQ(y2, doctest::Approx(-0.7421590126111789).epsilon(1e-12));
}

TEST_CASE("quartile index and quadrant sign patterns") {
    // one quadrant per X1-quartile: (-,-), (-,+), (+,-), (+,+)
    const double sx[4] = {-1, -1, +1, +1};
    const double sy[4] = {-1, +1, -1, +1};
    const double probes[] = {0.03, 0.11, 0.22, 0.49, 0.77, 0.98};
    for (double x1 : probes) {
        for (double x2 : {0.05, 0.33, 0.71, 0.99}) {
            double y1, y2;
            int q;
            synth_map(x1, x2, y1, y2, q);
            CHECK_EQ(q, std::min(3, static_cast<int>(x1 * 4.0)));
            CHECK(y1 * sx[q] > 0.0);
            CHECK(y2 * sy[q] > 0.0);
        }
    }
    double y1, y2;
    int q;
    synth_map(0.25, 0.5, y1, y2, q);  // boundary belongs to the next quartile
    CHECK_EQ(q, 1);
}

TEST_CASE("generated points stay in the closed unit disk") {
    auto s = generate(5000, 31);
    for (Eigen::Index i = 0; i < s.data.rows(); ++i) {
        const double r2 = s.data.y(i, 0) * s.data.y(i, 0) + s.data.y(i, 1) * s.data.y(i, 1);
        CHECK(std::sqrt(r2) <= 1.0 + 1e-12);
    }
}

TEST_CASE("the map is one-to-one on a sample") {
    auto s = generate(4000, 12);
    std::set<std::pair<double, double>> xs, ys;
    for (Eigen::Index i = 0; i < s.data.rows(); ++i) {
        xs.emplace(s.data.x(i, 0), s.data.x(i, 1));
        ys.emplace(s.data.y(i, 0), s.data.y(i, 1));
    }
    REQUIRE_EQ(xs.size(), 4000u);  // no duplicate inputs in the draw
    CHECK_EQ(ys.size(), 4000u);
}

TEST_CASE("quadrant occupancy is uniform (chi-square)") {
    auto s = generate(5000, 44);
    double counts[4] = {0, 0, 0, 0};
    for (int q : s.quadrant) counts[q] += 1.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - 1250.0) * (c - 1250.0) / 1250.0;
    CHECK(chi2 < 16.27);  // df=3, p=0.001
    // labels agree with the X1-quartile
    for (Eigen::Index i = 0; i < 200; ++i)
        CHECK_EQ(s.quadrant[static_cast<std::size_t>(i)],
                 std::min(3, static_cast<int>(s.data.x(i, 0) * 4.0)));
}

TEST_CASE("generation is deterministic given the seed") {
    auto a = generate(128, 7);
    auto b = generate(128, 7);
    CHECK(a.data.x == b.data.x);
    CHECK(a.data.y == b.data.y);
    CHECK(a.quadrant == b.quadrant);
    auto c = generate(128, 8);
    CHECK(a.data.x != c.data.x);
}

TEST_CASE("column names and argument checking") {
    auto s = generate(3, 1);
    CHECK_EQ(s.data.x_names, std::vector<std::string>{"x1", "x2"});
    CHECK_EQ(s.data.y_names, std::vector<std::string>{"y1", "y2"});
    CHECK_THROWS_AS(generate(0, 1), std::invalid_argument);
}

// The gather step compresses 80% of each quartile into a fifth of the arc,
// so those samples sit strictly closer to the dense end than any spread one.
TEST_CASE("gathered samples dominate one end of each arc") {
    auto s = generate(2000, 99);
    int gathered = 0;
    for (Eigen::Index i = 0; i < s.data.rows(); ++i)
        if (s.data.x(i, 1) > 0.2) ++gathered;
    CHECK(gathered > 1500);
    CHECK(gathered < 1900);
}

}  // TEST_SUITE
