#include <doctest.h>

#include <random>

#include <Eigen/SVD>

#include "limbmap/error.hpp"
#include "limbmap/mapping.hpp"
#include "support.hpp"

using namespace limbmap;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

struct Pairs {
    std::vector<UpperFeature> X;
    std::vector<LowerFeature> Y;
};

// Upper features around the default gait magnitudes, Y = T x + b + noise.
Pairs make_pairs(const LinearMap& truth, std::size_t m, std::uint64_t seed, double noise = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const Vec4 centre(-18.0, 22.0, 15.0, 45.0);
    Pairs p;
    for (std::size_t i = 0; i < m; ++i) {
        UpperFeature u;
        for (int k = 0; k < 4; ++k) u.x[k] = centre[k] + 3.0 * g(rng);
        u.cycle_index = i;
        LowerFeature l;
        l.y = truth.apply(u.x);
        for (int k = 0; k < 4; ++k) l.y[k] += noise * g(rng);
        l.cycle_index = i;
        p.X.push_back(u);
        p.Y.push_back(l);
    }
    return p;
}

double sse(const LinearMap& map, const Pairs& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.X.size(); ++i) s += (map.apply(p.X[i].x) - p.Y[i].y).squaredNorm();
    return s;
}

}  // namespace

TEST_CASE("design rows are the features followed by a one") {
    const std::vector<UpperFeature> one{{Vec4(1, 2, 3, 4), 0}};
    const Eigen::MatrixXd phi = assemble_design(one);
    REQUIRE(phi.rows() == 1);
    REQUIRE(phi.cols() == 5);
    CHECK(phi(0, 0) == 1.0);
    CHECK(phi(0, 3) == 4.0);
    CHECK(phi(0, 4) == 1.0);

    const std::vector<UpperFeature> zeros(7);
    const Eigen::MatrixXd z = assemble_design(zeros);
    CHECK(z.rows() == 7);
    CHECK(z.cols() == 5);
    CHECK(z.col(4).isOnes());
    CHECK(z.leftCols(4).isZero());
}

TEST_CASE("noise-free data from the published map is recovered to 1e-9") {
    const LinearMap truth = testing::paper_map();
    const Pairs p = make_pairs(truth, 50, 1);
    const Identification id = identify(p.X, p.Y);
    CHECK((id.map.T - truth.T).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((id.map.b - truth.b).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(id.map.T(0, 2) == doctest::Approx(1.6623).epsilon(1e-12));
    CHECK(id.map.b[1] == doctest::Approx(40.2068).epsilon(1e-12));
    CHECK(id.residuals.count == 50);
    CHECK(id.residuals.mean.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(id.residuals.std.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("arbitrary finite maps are recovered to nine significant digits") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        LinearMap truth;
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) truth.T(r, c) = u(rng);
            truth.b[r] = 20.0 * u(rng);
        }
        const Pairs p = make_pairs(truth, 30, 100 + static_cast<std::uint64_t>(trial));
        const Identification id = identify(p.X, p.Y);
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                CHECK(std::abs(id.map.T(r, c) - truth.T(r, c)) <= 1e-9 * std::max(1.0, std::abs(truth.T(r, c))));
            }
            CHECK(std::abs(id.map.b[r] - truth.b[r]) <= 1e-9 * std::max(1.0, std::abs(truth.b[r])));
        }
    }
}

TEST_CASE("five full-rank samples are interpolated exactly") {
    Pairs p = make_pairs(testing::paper_map(), 5, 8);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 10.0);
    for (auto& l : p.Y) {
        for (int k = 0; k < 4; ++k) l.y[k] = g(rng);
    }
    const Identification id = identify(p.X, p.Y);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK((id.map.apply(p.X[i].x) - p.Y[i].y).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("identification needs five samples and a well-conditioned design") {
    const Pairs four = make_pairs(testing::paper_map(), 4, 1);
    CHECK(code_of([&] { identify(four.X, four.Y); }) == ErrorCode::TooFewSamples);

    Pairs flat = make_pairs(testing::paper_map(), 20, 1);
    for (auto& u : flat.X) u.x[3] = 2.0 * u.x[0];
    CHECK(code_of([&] { identify(flat.X, flat.Y); }) == ErrorCode::RankDeficient);
}

TEST_CASE("feature sets must be aligned by cycle") {
    Pairs p = make_pairs(testing::paper_map(), 10, 1);
    p.Y[3].cycle_index = 99;
    CHECK(code_of([&] { identify(p.X, p.Y); }) == ErrorCode::InvalidParams);
    p.Y.pop_back();
    CHECK(code_of([&] { identify(p.X, p.Y); }) == ErrorCode::InvalidParams);
}

TEST_CASE("published map applied to zero features gives the offsets") {
    const Vec4 y = apply_map(testing::paper_map(), UpperFeature{Vec4::Zero(), 0});
    CHECK(y[0] == 3.0487);
    CHECK(y[1] == 40.2068);
    CHECK(y[2] == -3.3855);
    CHECK(y[3] == -89.9575);
}

TEST_CASE("published map applied to a unit elbow trough adds the third column") {
    const Vec4 y = apply_map(testing::paper_map(), UpperFeature{Vec4(0, 0, 1, 0), 0});
    // hand sums: 1.6623 + 3.0487, 1.3587 + 40.2068, -1.5821 - 3.3855, -1.0221 - 89.9575
    const Vec4 expected(4.7110, 41.5655, -4.9676, -90.9796);
    CHECK((y - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity map returns its input") {
    const LinearMap id;
    const Vec4 x(1.5, -2.0, 30.0, 7.25);
    CHECK(apply_map(id, UpperFeature{x, 0}) == x);
}

TEST_CASE("noisy residuals are unbiased with the injected spread") {
    const Pairs p = make_pairs(testing::paper_map(), 10000, 5, 3.0);
    const Identification id = identify(p.X, p.Y);
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(id.residuals.mean[k]) < 0.1);
        CHECK(std::abs(id.residuals.std[k] - 3.0) < 0.3);
    }
}

TEST_CASE("training residual means vanish thanks to the intercept column") {
    const Pairs p = make_pairs(testing::paper_map(), 200, 12, 2.0);
    const Identification id = identify(p.X, p.Y);
    CHECK(id.residuals.mean.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("residual statistics use the population spread") {
    LinearMap zero;
    zero.T.setZero();
    std::vector<UpperFeature> X{{Vec4::Zero(), 0}, {Vec4::Zero(), 1}};
    std::vector<LowerFeature> Y{{Vec4::Constant(1.0), 0}, {Vec4::Constant(3.0), 1}};
    const ResidualStats s = residual_stats(zero, X, Y);
    CHECK(s.count == 2);
    CHECK(s.mean.isApprox(Vec4::Constant(-2.0)));
    CHECK(s.std.isApprox(Vec4::Constant(1.0)));

    X.pop_back();
    Y.pop_back();
    CHECK(code_of([&] { residual_stats(zero, X, Y); }) == ErrorCode::TooFewSamples);
}

TEST_CASE("perturbing any map entry never lowers the training error") {
    const Pairs p = make_pairs(testing::paper_map(), 60, 21, 2.5);
    const LinearMap best = identify(p.X, p.Y).map;
    const double base = sse(best, p);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 5; ++c) {
            for (double d : {1e-3, -1e-3}) {
                LinearMap m = best;
                if (c < 4) m.T(r, c) += d;
                else m.b[r] += d;
                CHECK(sse(m, p) >= base);
            }
        }
    }
}

TEST_CASE("mapped outputs obey the operator-norm Lipschitz bound") {
    const LinearMap map = testing::paper_map();
    const double L = operator_norm(map.T);
    CHECK(L == doctest::Approx(map.T.jacobiSvd().singularValues()(0)));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        Vec4 a, b;
        for (int k = 0; k < 4; ++k) a[k] = g(rng), b[k] = g(rng);
        const double lhs = (apply_map(map, {a, 0}) - apply_map(map, {b, 0})).norm();
        CHECK(lhs <= L * (a - b).norm() * (1.0 + 1e-12));
    }
}

TEST_CASE("residual table mirrors the paper's layout") {
    ResidualStats s;
    s.mean = Vec4(-0.0003, -0.0015, 0.0, 0.0);
    s.std = Vec4(3.4532, 2.9461, 2.0199, 2.6823);
    s.count = 100;
    const std::string table = format_residual_table(s);
    CHECK(table.find("Model error") != std::string::npos);
    CHECK(table.find("Mean(degree)") != std::string::npos);
    CHECK(table.find("Std(degree)") != std::string::npos);
    CHECK(table.find("3.4532") != std::string::npos);
    CHECK(table.find("y4") != std::string::npos);
}

TEST_CASE("map file round trip keeps full precision") {
    const Pairs p = make_pairs(testing::paper_map(), 40, 3, 1.0);
    const LinearMap map = identify(p.X, p.Y).map;
    const LinearMap back = parse_map(format_map(map));
    CHECK(back.T == map.T);
    CHECK(back.b == map.b);
    testing::TempDir dir("map");
    save_map(dir / "M.txt", map);
    CHECK(load_map(dir / "M.txt").T == map.T);
}

TEST_CASE("malformed map files are rejected") {
    CHECK(code_of([] { parse_map("T\n1 2 3 4\n"); }) == ErrorCode::BadModelFile);
    CHECK(code_of([] { parse_map("T\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\nb\n0 0 inf 0\n"); }) ==
          ErrorCode::BadModelFile);
    CHECK(code_of([] { parse_map("T\n1 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\nb\n0 0 0 0\n"); }) ==
          ErrorCode::BadModelFile);
    CHECK_NOTHROW(parse_map("T\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\nb\n0 0 0 0\n"));
}
