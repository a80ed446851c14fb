#include "doctest.h"

#include <cmath>
#include <random>

#include "crcca/linalg.hpp"
#include "crcca/linear_cca.hpp"

using namespace crcca;

namespace {

// Small fixed dataset; the expected canonical correlations were computed
// with an independent SVD-based script and cross-checked against the
// generalized-eigenvalue formulation.
PairedDataset reference_data() {
    PairedDataset d;
    d.x.resize(12, 2);
    d.x << 0, 1, 1, 2, 2, 0.5, 3, 4, 4, 2.5, 5, 7, 6, 3.5, 7, 8, 8, 6.5, 9, 10, 10, 9.5, 11, 12;
    d.y.resize(12, 2);
    d.y << 0.5, 2, 1.5, 1, 1, 3, 3.5, 3, 3, 5.5, 5.5, 5, 5, 7.5, 7.5, 7, 7, 9.5, 9.5, 9, 9, 11.5,
        11.5, 11;
    return d;
}

}  // namespace

TEST_SUITE("linear_cca") {

TEST_CASE("canonical correlations match the reference values") {
    auto model = fit_linear_cca(reference_data(), 2);
    REQUIRE_EQ(model.correlations.size(), 2);
    CHECK_EQ(model.correlations(0), doctest::Approx(0.9983884647494802).epsilon(1e-9));
    CHECK_EQ(model.correlations(1), doctest::Approx(0.8741958237666686).epsilon(1e-9));
    CHECK(model.correlations(0) >= model.correlations(1));
}

TEST_CASE("projected data reproduces the correlations and is whitened") {
    auto d = reference_data();
    auto model = fit_linear_cca(d, 2);
    auto p = project(model, d.x, d.y);
    Vector cs = component_correlations(p.u, p.v);
    CHECK_EQ(cs(0), doctest::Approx(model.correlations(0)).epsilon(1e-10));
    CHECK_EQ(cs(1), doctest::Approx(model.correlations(1)).epsilon(1e-10));

    for (const Matrix* m : {&p.u, &p.v}) {
        auto mom = column_moments(*m);
        CHECK(mom.mean.cwiseAbs().maxCoeff() < 1e-10);
        CHECK((mom.covariance - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("a rotation of the same variables is perfectly correlated") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> nd;
    PairedDataset d;
    d.x.resize(60, 2);
    for (int i = 0; i < 60; ++i) {
        d.x(i, 0) = nd(gen);
        d.x(i, 1) = nd(gen);
    }
    const double th = 0.6;
    Matrix rot(2, 2);
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    d.y = d.x * rot.transpose();
    auto model = fit_linear_cca(d, 2);
    CHECK(model.correlations(0) > 1.0 - 1e-10);
    CHECK(model.correlations(1) > 1.0 - 1e-10);
}

TEST_CASE("correlations are invariant under invertible affine maps of a view") {
    auto d = reference_data();
    auto base = fit_linear_cca(d, 2);
    Matrix a(2, 2);
    a << 2, 1, -0.5, 3;
    d.x = (d.x * a.transpose()).rowwise() + Eigen::RowVector2d(5, -3);
    auto mapped = fit_linear_cca(d, 2);
    CHECK_EQ(mapped.correlations(0), doctest::Approx(base.correlations(0)).epsilon(1e-9));
    CHECK_EQ(mapped.correlations(1), doctest::Approx(base.correlations(1)).epsilon(1e-9));
}

TEST_CASE("sign convention: whitened-basis x vectors peak positive") {
    auto d = reference_data();
    auto model = fit_linear_cca(d, 2);
    // projection_x composes the whitener with the whitened-basis vector, so
    // undo the whitening to get at the vector the convention pins down.
    const Matrix cov = column_moments(d.x).covariance;
    const Matrix sqrt_cov = inverse_sqrt_psd(cov).inverse();
    const Matrix wu = sqrt_cov * model.projection_x.transpose();
    for (int j = 0; j < 2; ++j) {
        Eigen::Index peak;
        wu.col(j).cwiseAbs().maxCoeff(&peak);
        CHECK(wu(peak, j) > 0.0);
    }
}

TEST_CASE("dimension and sample-count preconditions") {
    auto d = reference_data();
    CHECK_THROWS_AS(fit_linear_cca(d, 3), std::invalid_argument);
    CHECK_THROWS_AS(fit_linear_cca(d, 0), std::invalid_argument);
    PairedDataset tiny;
    tiny.x = Matrix::Random(2, 2);
    tiny.y = Matrix::Random(2, 2);
    CHECK_THROWS_AS(fit_linear_cca(tiny, 1), std::invalid_argument);
}

TEST_CASE("singular covariance: hard failure without ridge, silent with") {
    auto d = reference_data();
    d.x.col(1) = d.x.col(0);  // collinear
    CHECK_THROWS_AS(fit_linear_cca(d, 1), std::runtime_error);
    auto model = fit_linear_cca(d, 1, 1e-6);
    CHECK(std::isfinite(model.correlations(0)));
}

TEST_CASE("descending correlation order on noisy data") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    PairedDataset d;
    d.x.resize(200, 3);
    d.y.resize(200, 3);
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < 3; ++j) d.x(i, j) = nd(gen);
        d.y(i, 0) = d.x(i, 0) + 0.1 * nd(gen);
        d.y(i, 1) = d.x(i, 1) + 1.0 * nd(gen);
        d.y(i, 2) = nd(gen);
    }
    auto model = fit_linear_cca(d, 3);
    CHECK(model.correlations(0) >= model.correlations(1));
    CHECK(model.correlations(1) >= model.correlations(2));
    CHECK(model.correlations(2) >= 0.0);
}

}  // TEST_SUITE
