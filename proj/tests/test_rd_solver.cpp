#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "crcca/rd_solver.hpp"

using namespace crcca;

namespace {

Matrix col(std::initializer_list<double> vals) {
    Matrix m(static_cast<Eigen::Index>(vals.size()), 1);
    Eigen::Index i = 0;
    for (double v : vals) m(i++, 0) = v;
    return m;
}

Vector vec(std::initializer_list<double> vals) {
    Vector v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v(i++) = x;
    return v;
}

// natural-log binary entropy, h(0) = h(1) = 0
double h_nats(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

}  // namespace

TEST_SUITE("rd") {

TEST_CASE("fresh channel is uniform and valid") {
    auto ch = make_channel(col({-1, 0, 1}), vec({0.25, 0.5, 0.25}), col({-1, 1}));
    ch.validate();
    CHECK_EQ(ch.conditional(0, 0), 0.5);
    CHECK_EQ(ch.marginal(1), 0.5);
    CHECK_EQ(ch.eta, 0.0);

    auto bad = ch;
    bad.conditional(0, 0) = 0.7;  // row no longer sums to 1
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ch;
    bad.prior(0) = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("conditional update with no penalties copies the marginal") {
    auto ch = make_channel(col({-2, 0, 2}), vec({0.3, 0.3, 0.4}), col({-1, 0, 1}));
    ch.marginal = vec({0.2, 0.5, 0.3});
    auto out = conditional_update(ch);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            CHECK_EQ(out.conditional(j, k), doctest::Approx(ch.marginal(k)).epsilon(1e-15));
}

TEST_CASE("single reproduction point forces a deterministic channel") {
    auto ch = make_channel(col({-1, 1}), vec({0.5, 0.5}), col({0}));
    ch.eta = 3.0;
    auto out = conditional_update(ch);
    CHECK_EQ(out.conditional(0, 0), 1.0);
    CHECK_EQ(out.conditional(1, 0), 1.0);
}

TEST_CASE("conditional update matches a direct formula evaluation") {
    auto ch = make_channel(col({-1, 0, 1}), vec({0.25, 0.5, 0.25}), col({-1, 0, 1}));
    ch.marginal = vec({0.2, 0.3, 0.5});
    ch.eta = 0.7;
    ch.tau = vec({0.3});
    ch.mu = Matrix::Constant(1, 1, 0.2);
    auto out = conditional_update(ch);
    for (int j = 0; j < 3; ++j) {
        double w[3], total = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double v = ch.source(j, 0), u = ch.repro(k, 0);
            w[k] = ch.marginal(k) *
                   std::exp(-0.7 * (u - v) * (u - v) - 0.3 * u - 0.2 * u * u);
            total += w[k];
        }
        for (int k = 0; k < 3; ++k)
            CHECK_EQ(out.conditional(j, k), doctest::Approx(w[k] / total).epsilon(1e-12));
    }
}

TEST_CASE("zero-mass reproduction points stay at zero") {
    auto ch = make_channel(col({-1, 1}), vec({0.5, 0.5}), col({-1, 0, 1}));
    ch.marginal = vec({0.5, 0.5, 0.0});
    ch.eta = 1.0;
    auto out = conditional_update(ch);
    CHECK_EQ(out.conditional(0, 2), 0.0);
    CHECK_EQ(out.conditional(1, 2), 0.0);
    CHECK_EQ(marginal_update(out).marginal(2), 0.0);
}

TEST_CASE("marginal update is the prior-weighted column sum") {
    auto ch = make_channel(col({-1, 0, 1}), vec({0.2, 0.5, 0.3}), col({-1, 1}));
    ch.conditional << 0.9, 0.1, 0.4, 0.6, 0.2, 0.8;
    auto out = marginal_update(ch);
    for (int k = 0; k < 2; ++k) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += ch.conditional(j, k) * ch.prior(j);
        CHECK_EQ(out.marginal(k), doctest::Approx(s).epsilon(1e-14));
    }
    CHECK_EQ(out.marginal.sum(), doctest::Approx(1.0).epsilon(1e-14));

    // a source-independent conditional leaves the marginal alone
    ch.conditional << 0.3, 0.7, 0.3, 0.7, 0.3, 0.7;
    out = marginal_update(ch);
    CHECK_EQ(out.marginal(0), doctest::Approx(0.3).epsilon(1e-15));

    // a deterministic conditional pushes the prior forward
    ch.conditional << 1, 0, 0, 1, 0, 1;
    out = marginal_update(ch);
    CHECK_EQ(out.marginal(0), doctest::Approx(0.2).epsilon(1e-15));
    CHECK_EQ(out.marginal(1), doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("symmetric problems need no mean multiplier") {
    auto ch = make_channel(col({-1, 1}), vec({0.5, 0.5}), col({-1, 1}));
    ch.eta = 0.4;
    auto out = solve_multipliers(ch);
    CHECK_EQ(out.tau(0), 0.0);     // satisfied from the start, never searched
    CHECK_EQ(out.mu(0, 0), 0.0);   // E(U^2)=1 is forced by the support
    CHECK(std::abs(channel_mean(out)(0)) <= 1e-6);
    CHECK(std::abs(channel_second_moment(out)(0) - 1.0) <= 1e-6);
}

TEST_CASE("moment constraints hold at an asymmetric fixed point") {
    auto ch = make_channel(col({-1, 0, 1}), vec({0.2, 0.5, 0.3}), col({-1, 0, 1}));
    ch.eta = 0.5;
    auto out = solve_multipliers(ch);
    CHECK(std::abs(channel_mean(out)(0)) <= 1e-6);
    CHECK(std::abs(channel_second_moment(out)(0) - 1.0) <= 1e-6);

    // and it is a genuine fixed point of the two updates
    auto after = marginal_update(conditional_update(out));
    const double drift =
        std::max((after.conditional - out.conditional).cwiseAbs().maxCoeff(),
                 (after.marginal - out.marginal).cwiseAbs().maxCoeff());
    CHECK(drift <= 1e-8);
}

TEST_CASE("impossible moment targets are reported") {
    auto ch = make_channel(col({-1, 1}), vec({0.5, 0.5}), col({1, 1}));  // all repro at +1
    ch.eta = 0.1;
    try {
        solve_multipliers(ch);
        CHECK(false);
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("infeasible") != std::string::npos);
    }
}

// Source {-1,0,1} with prior (1/4,1/2,1/4): the moment constraints force the
// reproduction marginal to (1/2,0,1/2), so feasible channels have rows
// (1-r_j, 0, r_j) with sum_j p_j r_j = 1/2. Scanning (r_-1, r_1) on a 0.02
// grid brute-forces min I + eta*E d^2 for comparison with the fixed point.
TEST_CASE("three-point fixed point matches an exhaustive channel grid") {
    const double eta = 0.5;
    auto ch = make_channel(col({-1, 0, 1}), vec({0.25, 0.5, 0.25}), col({-1, 0, 1}));
    ch.eta = eta;
    auto out = solve_multipliers(ch);
    const double f_solver =
        channel_rate_bits(out) * std::log(2.0) + eta * channel_distortion(out);

    double f_best = 1e100;
    for (int ia = 0; ia <= 50; ++ia) {
        for (int ic = 0; ic <= 50; ++ic) {
            const double a = 0.02 * ia;        // q(+1 | -1)
            const double c = 0.02 * ic;        // q(+1 | +1)
            const double r0 = 1.0 - 0.5 * (a + c);  // q(+1 | 0), from E(U)=0
            const double i_nats = std::log(2.0) - (0.25 * h_nats(a) + 0.5 * h_nats(r0) +
                                                   0.25 * h_nats(c));
            const double dist = 1.5 + a - c;
            f_best = std::min(f_best, i_nats + eta * dist);
        }
    }
    CHECK(std::abs(f_solver - f_best) <= 1e-3);
    // the grid is a subset of the feasible set, up to the 1e-6 moment slack
    CHECK(f_solver <= f_best + 1e-4);
}

TEST_CASE("slack distortion budgets cost no rate") {
    auto res = solve_rd(col({-1, 1}), vec({0.5, 0.5}), col({-1, 1}), 5.0);
    CHECK(res.rate_bits <= 1e-3);
    CHECK(res.distortion <= 5.0);
    CHECK_EQ(res.channel.eta, 0.0);
}

TEST_CASE("discretized gaussian lands near the closed-form rate") {
    const int j = 41;
    Matrix source(j, 1);
    Vector prior(j);
    for (int i = 0; i < j; ++i) {
        const double v = -4.0 + 8.0 * i / (j - 1);
        source(i, 0) = v;
        prior(i) = std::exp(-0.5 * v * v);
    }
    prior /= prior.sum();
    Matrix repro = default_repro_grid(source, prior, 81);
    RdOptions opts;
    opts.constrain_moments = false;
    auto res = solve_rd(source, prior, repro, 0.25, opts);
    CHECK(res.distortion <= 0.25);
    CHECK(res.distortion >= 0.25 - 1e-2);
    CHECK(std::abs(res.rate_bits - 1.0) <= 0.1);  // R(0.25) = 1 bit for unit variance

    // distortion is monotone in eta along the searched trace
    auto trace = res.eta_trace;
    std::sort(trace.begin(), trace.end(),
              [](const EtaPoint& a, const EtaPoint& b) { return a.eta < b.eta; });
    for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i].distortion <= trace[i - 1].distortion + 1e-6);

    // the two mutual-information forms agree
    CHECK(std::abs(channel_rate_bits(res.channel) - channel_rate_bits_entropy(res.channel)) <=
          1e-10);
    CHECK(res.rate_bits >= 0.0);
}

TEST_CASE("unreachable distortion bounds are an error") {
    CHECK_THROWS_AS(solve_rd(col({-1, 1}), vec({0.5, 0.5}), col({-1, 1}), 0.0),
                    std::invalid_argument);
    RdOptions opts;
    opts.constrain_moments = false;
    // single reproduction point at 0: distortion is stuck at E(V^2) = 1
    CHECK_THROWS_AS(solve_rd(col({-1, 1}), vec({0.5, 0.5}), col({0}), 0.2, opts),
                    std::runtime_error);
}

TEST_CASE("default reproduction grid spans the prior support plus a std") {
    auto grid = default_repro_grid(col({-1, 1}), vec({0.5, 0.5}), 5);
    REQUIRE_EQ(grid.rows(), 5);
    for (int i = 0; i < 5; ++i) CHECK_EQ(grid(i, 0), doctest::Approx(-2.0 + i).epsilon(1e-12));
    Matrix wide(2, 2);
    wide << -1, 0, 1, 0;
    CHECK_THROWS_AS(default_repro_grid(wide, vec({0.5, 0.5}), 5), std::invalid_argument);
}

}  // TEST_SUITE
