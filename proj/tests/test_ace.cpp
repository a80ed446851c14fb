#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <vector>

#include "crcca/ace.hpp"
#include "crcca/linalg.hpp"
#include "crcca/synthgen.hpp"

using namespace crcca;

TEST_SUITE("ace") {

TEST_CASE("knn matches a brute-force scan, nearest first") {
    std::mt19937_64 gen(14);
    std::normal_distribution<double> nd;
    Matrix pts(40, 3), queries(9, 3);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 3; ++j) pts(i, j) = nd(gen);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 3; ++j) queries(i, j) = nd(gen);

    const int k = 5;
    auto got = knn_indices(pts, queries, k);
    REQUIRE_EQ(got.rows(), 9);
    REQUIRE_EQ(got.cols(), k);
    for (int qi = 0; qi < 9; ++qi) {
        std::vector<std::pair<double, Eigen::Index>> all;
        for (Eigen::Index p = 0; p < 40; ++p)
            all.emplace_back((pts.row(p) - queries.row(qi)).squaredNorm(), p);
        std::sort(all.begin(), all.end());
        for (int j = 0; j < k; ++j) CHECK_EQ(got(qi, j), all[static_cast<std::size_t>(j)].second);
    }
}

TEST_CASE("knn distance ties resolve to the lower training index") {
    Matrix pts(4, 1);
    pts << 1.0, -1.0, 3.0, -3.0;  // pairs equidistant from 0
    Matrix query(1, 1);
    query << 0.0;
    auto got = knn_indices(pts, query, 4);
    CHECK_EQ(got(0, 0), 0);
    CHECK_EQ(got(0, 1), 1);
    CHECK_EQ(got(0, 2), 2);
    CHECK_EQ(got(0, 3), 3);
}

TEST_CASE("threaded and serial knn agree exactly") {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> nd;
    Matrix pts(600, 2), queries(600, 2);
    for (int i = 0; i < 600; ++i)
        for (int j = 0; j < 2; ++j) {
            pts(i, j) = nd(gen);
            queries(i, j) = nd(gen);
        }
    auto serial = knn_indices(pts, queries, 7, 1);
    auto threaded = knn_indices(pts, queries, 7, 4);
    CHECK(serial == threaded);
}

TEST_CASE("identity relation reaches correlation one") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    PairedDataset d;
    d.x.resize(300, 1);
    for (int i = 0; i < 300; ++i) d.x(i, 0) = nd(gen);
    d.y = d.x;
    auto model = fit_ace(d, 1, 3);
    CHECK(model.correlations(0) > 0.999);
}

TEST_CASE("a monotone reparameterization is still found") {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    PairedDataset d;
    d.x.resize(400, 1);
    d.y.resize(400, 1);
    for (int i = 0; i < 400; ++i) {
        d.x(i, 0) = ud(gen);
        d.y(i, 0) = std::exp(d.x(i, 0));  // nonlinear but invertible
    }
    auto model = fit_ace(d, 1, 5);
    CHECK(model.correlations(0) > 0.99);
}

TEST_CASE("components are standardized and mutually orthogonal") {
    auto d = generate(500, 33).data;
    auto model = fit_ace(d, 2, 10);
    const double n = static_cast<double>(d.rows());
    for (const Matrix* m : {&model.phi, &model.psi}) {
        for (int c = 0; c < 2; ++c) {
            CHECK(std::abs(m->col(c).mean()) < 1e-10);
            CHECK_EQ(m->col(c).squaredNorm() / n, doctest::Approx(1.0).epsilon(1e-8));
        }
        CHECK(std::abs(m->col(0).dot(m->col(1)) / n) < 1e-8);
    }
}

TEST_CASE("fit is deterministic and thread-count independent") {
    auto d = generate(400, 21).data;
    auto a = fit_ace(d, 2, 8);
    setenv("CRCCA_THREADS", "4", 1);
    auto b = fit_ace(d, 2, 8);
    unsetenv("CRCCA_THREADS");
    CHECK(a.phi == b.phi);
    CHECK(a.psi == b.psi);
    CHECK(a.correlations == b.correlations);
}

TEST_CASE("prediction with k=1 reproduces the fitted tables at train points") {
    auto d = generate(200, 9).data;
    auto model = fit_ace(d, 1, 1);
    auto p = predict_ace(model, d.x, d.y);
    CHECK((p.u - model.phi).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((p.v - model.psi).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("prediction smooths held-out points sensibly") {
    auto train = generate(1000, 50).data;
    auto fresh = generate(1000, 51).data;
    auto model = fit_ace(train, 2, 25);
    auto p = predict_ace(model, fresh.x, fresh.y);
    CHECK(normalized_objective(p.u, p.v) > 0.9);
}

TEST_CASE("argument checking") {
    auto d = generate(50, 1).data;
    CHECK_THROWS_AS(fit_ace(d, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(fit_ace(d, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_ace(d, 1, 50), std::invalid_argument);  // k must stay below n
}

TEST_CASE("constant view cannot carry a component") {
    PairedDataset d;
    d.x = Matrix::Random(60, 1);
    d.y = Matrix::Constant(60, 1, 5.0);
    try {
        fit_ace(d, 1, 4);
        CHECK(false);
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("constant") != std::string::npos);
    }
}

}  // TEST_SUITE
