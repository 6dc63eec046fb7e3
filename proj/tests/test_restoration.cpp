#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "limbmap/error.hpp"
#include "limbmap/restoration.hpp"
#include "limbmap/simulation.hpp"
#include "reference_fixture.hpp"

using namespace limbmap;
using testing::kTwoPi;
using testing::ReferenceFixture;

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

struct Planted {
    std::vector<UpperFeature> X;
    std::vector<LowerFeature> Y;
    std::vector<GaitCycle> cycles;
    std::vector<std::size_t> group;
    std::vector<Eigen::Matrix<double, 8, 1>> means;
};

// Four large tight groups plus five small distant ones in (x; y) space.
Planted planted_groups(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Planted p;
    const std::array<std::size_t, 9> sizes{40, 35, 30, 25, 4, 4, 3, 3, 3};
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        Eigen::Matrix<double, 8, 1> mean;
        const double reach = c < 4 ? 40.0 : 150.0;
        for (int k = 0; k < 8; ++k) mean[k] = reach * g(rng);
        p.means.push_back(mean);
    }
    std::size_t index = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        for (std::size_t i = 0; i < sizes[c]; ++i, ++index) {
            UpperFeature u;
            LowerFeature l;
            for (int k = 0; k < 4; ++k) {
                u.x[k] = p.means[c][k] + 0.5 * g(rng);
                l.y[k] = p.means[c][4 + k] + 0.5 * g(rng);
            }
            u.cycle_index = l.cycle_index = index;
            GaitCycle cyc;
            cyc.index = index;
            cyc.period = 1.0;
            for (auto& curve : cyc.curves) curve.assign(20, static_cast<double>(c));
            p.X.push_back(u);
            p.Y.push_back(l);
            p.cycles.push_back(cyc);
            p.group.push_back(c);
        }
    }
    return p;
}

Eigen::MatrixXd random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 5.0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng) + (i % 3 == 0 ? 20.0 : 0.0);
    return m;
}

}  // namespace

TEST_CASE("kmeans is deterministic in its seed") {
    const Eigen::MatrixXd pts = random_points(200, 8, 1);
    const KMeansResult a = kmeans(pts, 9, 42);
    const KMeansResult b = kmeans(pts, 9, 42);
    CHECK(a.labels == b.labels);
    CHECK(a.centroids == b.centroids);
    CHECK(a.wcss_history == b.wcss_history);
}

TEST_CASE("kmeans objective never increases across iterations") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd pts = random_points(300, 8, 100 + seed);
        const KMeansResult r = kmeans(pts, 9, seed);
        REQUIRE(!r.wcss_history.empty());
        for (std::size_t i = 1; i < r.wcss_history.size(); ++i) {
            CHECK(r.wcss_history[i] <= r.wcss_history[i - 1] * (1.0 + 1e-12));
        }
        CHECK(r.iterations <= 300);
    }
}

TEST_CASE("kmeans on identical points with one cluster returns that point") {
    Eigen::MatrixXd pts(6, 8);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) pts.row(i) = Eigen::VectorXd::LinSpaced(8, 1.0, 8.0).transpose();
    const KMeansResult r = kmeans(pts, 1, 3);
    CHECK(r.converged);
    CHECK(r.centroids.row(0) == pts.row(0));
    CHECK(r.wcss_history.back() == 0.0);
}

TEST_CASE("kmeans needs at least k points") {
    const Eigen::MatrixXd pts = random_points(5, 4, 2);
    CHECK(code_of([&] { kmeans(pts, 6, 0); }) == ErrorCode::TooFewSamples);
}

TEST_CASE("duplicate points that cannot fill every cluster exhaust the restarts") {
    std::vector<UpperFeature> X(12);
    std::vector<LowerFeature> Y(12);
    for (std::size_t i = 0; i < 12; ++i) {
        X[i].cycle_index = Y[i].cycle_index = i;
        X[i].x = Vec4::Constant(i < 6 ? 1.0 : 2.0);
        Y[i].y = Vec4::Constant(i < 6 ? 1.0 : 2.0);
    }
    ClusterConfig cfg;
    cfg.k = 3;
    CHECK(code_of([&] { cluster_features(X, Y, cfg); }) == ErrorCode::EmptyCluster);
}

TEST_CASE("clustering defaults to nine clusters and is reproducible") {
    CHECK(ClusterConfig{}.k == 9);
    const Planted p = planted_groups(5);
    const ClusterModel a = cluster_features(p.X, p.Y);
    const ClusterModel b = cluster_features(p.X, p.Y);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids.rows() == 9);
    CHECK(a.centroids.cols() == 8);
    for (const auto& [cycle, id] : a.assignments) CHECK(id < a.k);
}

TEST_CASE("clustering needs at least k cycles") {
    const Planted p = planted_groups(5);
    ClusterConfig cfg;
    cfg.k = 200;
    CHECK(code_of([&] { cluster_features(p.X, p.Y, cfg); }) == ErrorCode::TooFewSamples);
}

TEST_CASE("planted groups are recovered and the four largest become references") {
    const Planted p = planted_groups(7);
    const ClusterModel model = cluster_features(p.X, p.Y);
    // every planted group maps onto exactly one cluster
    std::map<std::size_t, std::set<std::size_t>> clusters_of_group;
    for (std::size_t i = 0; i < p.Y.size(); ++i) clusters_of_group[p.group[i]].insert(model.assignments.at(i));
    for (const auto& [grp, ids] : clusters_of_group) CHECK(ids.size() == 1);

    const RawReferences raw = select_representative(model, p.Y, p.cycles);
    for (std::size_t r = 0; r < 4; ++r) {
        // reference r is planted group r (sizes 40, 35, 30, 25)
        Vec4 oracle = Vec4::Zero();
        std::size_t n = 0;
        for (std::size_t i = 0; i < p.Y.size(); ++i) {
            if (p.group[i] == r) oracle += p.Y[i].y, ++n;
        }
        oracle /= static_cast<double>(n);
        CHECK(raw.sizes[r] == n);
        CHECK((raw.vectors[r] - oracle).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((raw.vectors[r] - p.means[r].tail<4>()).cwiseAbs().maxCoeff() < 0.5);
        CHECK(raw.curves[r].hip.front() == doctest::Approx(static_cast<double>(r)));
    }
}

TEST_CASE("pooled clustering assigns each cycle through its lower-limb point") {
    const Planted p = planted_groups(7);
    ClusterConfig cfg;
    cfg.space = ClusterSpace::Pooled;
    const ClusterModel model = cluster_features(p.X, p.Y, cfg);
    CHECK(model.centroids.cols() == 4);
    CHECK(model.assignments.size() == p.Y.size());
}

TEST_CASE("a single-member cluster's reference is that member's vector") {
    std::vector<LowerFeature> Y;
    std::vector<GaitCycle> cycles;
    ClusterModel model;
    model.k = 4;
    for (std::size_t i = 0; i < 7; ++i) {
        LowerFeature l;
        l.cycle_index = i;
        const double t = static_cast<double>(i);
        l.y = Vec4(1.0 + t, t * t, -3.0 * t + std::sin(t), 2.0 + std::cos(3.0 * t));
        const std::size_t id = i < 3 ? 0 : (i < 5 ? 1 : (i == 5 ? 2 : 3));
        model.assignments[i] = id;
        Y.push_back(l);
        GaitCycle c;
        c.index = i;
        for (auto& curve : c.curves) curve.assign(10, static_cast<double>(i));
        cycles.push_back(c);
    }
    // clusters 2 and 3 have one member each; cluster 2 wins the size tie
    const RawReferences raw = select_representative(model, Y, cycles);
    CHECK(raw.cluster_ids[2] == 2);
    CHECK(raw.cluster_ids[3] == 3);
    CHECK(raw.vectors[2] == Y[5].y);
    CHECK(raw.vectors[3] == Y[6].y);
}

TEST_CASE("fewer than four non-empty clusters cannot give references") {
    ClusterModel model;
    model.k = 4;
    std::vector<LowerFeature> Y(6);
    std::vector<GaitCycle> cycles(6);
    for (std::size_t i = 0; i < 6; ++i) {
        Y[i].cycle_index = cycles[i].index = i;
        model.assignments[i] = i % 3;
    }
    CHECK(code_of([&] { select_representative(model, Y, cycles); }) == ErrorCode::TooFewClusters);
}

TEST_CASE("references from a default corpus have the published magnitudes") {
    SynthParams p;
    p.n_cycles = 60;
    p.seed = 13;
    const TrainedModels t = train_models(synthesize_recording(p).recording);
    for (const Vec4& y : t.raw_references.vectors) {
        CHECK(y[0] <= y[1]);
        CHECK(y[3] <= y[2]);
        CHECK(y[1] > 35.0);
        CHECK(y[1] < 50.0);
        CHECK(y[3] > -110.0);
        CHECK(y[3] < -95.0);
    }
}

TEST_CASE("a pure sinusoid is fitted exactly") {
    const auto curve = testing::sampled(100, [](double ph) { return 3.0 + 12.0 * std::sin(kTwoPi * ph + 0.4); });
    for (std::size_t order : {1u, 3u, 6u}) {
        const FourierFit fit = fit_reference_curve(curve, order);
        CHECK(fit.rms < 1e-9);
        for (double ph : {0.0, 0.123, 0.5, 0.77, 0.999}) {
            CHECK(std::abs(fit.series(ph) - (3.0 + 12.0 * std::sin(kTwoPi * ph + 0.4))) < 1e-6);
        }
    }
}

TEST_CASE("fitted curves are periodic across the seam") {
    const auto curve = testing::sampled(100, [](double ph) {
        return 30.0 * ph * (1.0 - ph) + std::cos(3.0 * kTwoPi * ph);
    });
    const FourierSeries s = fit_reference_curve(curve, 6).series;
    CHECK(std::abs(s(0.0) - s(std::nextafter(1.0, 0.0))) < 1e-6);
}

TEST_CASE("order-6 fits of three-harmonic gait curves leave little residual") {
    const auto models = SynthParams::default_joint_models();
    for (const JointModel& m : models) {
        const auto curve = testing::sampled(100, [&](double ph) { return m.evaluate(ph); });
        CHECK(fit_reference_curve(curve, 6).rms < 0.05);
    }
}

TEST_CASE("fit order is limited by the grid") {
    const std::vector<double> curve(12, 1.0);
    CHECK_NOTHROW(fit_reference_curve(curve, 5));
    CHECK(code_of([&] { fit_reference_curve(curve, 6); }) == ErrorCode::OrderTooHigh);
}

TEST_CASE("each published reference vector solves to its unit weight") {
    const auto vectors = testing::paper_reference_vectors();
    const ReferenceSet refs(vectors, {}, {});
    for (std::size_t k = 0; k < 4; ++k) {
        const RestorationWeights w = solve_weights(vectors[k], refs);
        CHECK((w.a - Vec4::Unit(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() < 1e-9);
        CHECK_FALSE(w.ill_conditioned);
    }
    const RestorationWeights mid = solve_weights(0.5 * vectors[0] + 0.5 * vectors[3], refs);
    CHECK((mid.a - Vec4(0.5, 0.0, 0.0, 0.5)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("weight solves reproduce the target to relative 1e-9") {
    const auto vectors = testing::paper_reference_vectors();
    const ReferenceSet refs(vectors, {}, {});
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 30.0);
    for (int i = 0; i < 50; ++i) {
        Vec4 y;
        for (int k = 0; k < 4; ++k) y[k] = g(rng);
        const RestorationWeights w = solve_weights(y, refs);
        CHECK((refs.matrix() * w.a - y).norm() <= 1e-9 * std::max(1.0, y.norm()));
    }
}

TEST_CASE("a repeated reference vector is singular") {
    auto vectors = testing::paper_reference_vectors();
    vectors[2] = vectors[1];
    CHECK(code_of([&] { ReferenceSet(vectors, {}, {}); }) == ErrorCode::SingularReferenceMatrix);
}

TEST_CASE("nearly dependent references solve but are flagged") {
    auto vectors = testing::paper_reference_vectors();
    vectors[3] = vectors[0] + 1e-8 * Vec4(1.0, -2.0, 0.5, 3.0);
    const ReferenceSet refs(vectors, {}, {});
    CHECK(refs.condition() > kIllConditionedReference);
    CHECK(solve_weights(vectors[1], refs).ill_conditioned);
}

TEST_CASE("a unit weight restores that reference curve exactly") {
    const ReferenceFixture f;
    for (std::size_t k = 0; k < 4; ++k) {
        RestorationWeights w;
        w.a = Vec4::Unit(static_cast<Eigen::Index>(k));
        const LowerCurves c = restore_curve(w, f.refs, 100);
        for (std::size_t i = 0; i < 100; ++i) {
            const double ph = static_cast<double>(i) / 100.0;
            CHECK(c.hip[i] == f.refs.hip(k)(ph));
            CHECK(c.knee[i] == f.refs.knee(k)(ph));
        }
    }
}

TEST_CASE("restoration is linear in the weights") {
    const ReferenceFixture f;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        RestorationWeights a, b, sum, scaled;
        for (int k = 0; k < 4; ++k) a.a[k] = g(rng), b.a[k] = g(rng);
        const double c = 3.0 * g(rng);
        sum.a = a.a + b.a;
        scaled.a = c * a.a;
        const LowerCurves ra = restore_curve(a, f.refs, 64), rb = restore_curve(b, f.refs, 64);
        const LowerCurves rs = restore_curve(sum, f.refs, 64), rc = restore_curve(scaled, f.refs, 64);
        for (std::size_t i = 0; i < 64; ++i) {
            CHECK(std::abs(rs.hip[i] - (ra.hip[i] + rb.hip[i])) < 1e-9);
            CHECK(std::abs(rs.knee[i] - (ra.knee[i] + rb.knee[i])) < 1e-9);
            CHECK(std::abs(rc.hip[i] - c * ra.hip[i]) < 1e-9);
            CHECK(std::abs(rc.knee[i] - c * ra.knee[i]) < 1e-9);
        }
    }
}

TEST_CASE("features of a restored curve reproduce the in-span target") {
    const ReferenceFixture f;
    const double tol = 2.0 * f.refs.fit_rms();
    REQUIRE(f.refs.fit_rms() > 0.0);
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec4 a = ReferenceFixture::convex_weights(rng);
        Vec4 target = Vec4::Zero();
        for (std::size_t k = 0; k < 4; ++k) target += a[static_cast<Eigen::Index>(k)] * f.raw.vectors[k];
        const RestorationWeights w = solve_weights(target, f.refs);
        CHECK((w.a - a).cwiseAbs().maxCoeff() < 1e-9);
        const Vec4 got = ReferenceFixture::features_of(restore_curve(w, f.refs, ReferenceFixture::kGrid));
        CHECK((got - target).cwiseAbs().maxCoeff() <= tol);
    }
}

TEST_CASE("reference file round trip is exact") {
    const ReferenceFixture f;
    const ReferenceSet back = parse_references(format_references(f.refs));
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(back.vectors()[k] == f.refs.vectors()[k]);
        CHECK(back.hip(k).coefficients() == f.refs.hip(k).coefficients());
        CHECK(back.knee(k).coefficients() == f.refs.knee(k).coefficients());
    }
    CHECK(back.fit_order() == 6);
    testing::TempDir dir("refs");
    save_references(dir / "F.txt", f.refs);
    CHECK(format_references(load_references(dir / "F.txt")) == format_references(f.refs));
}

TEST_CASE("malformed reference files are rejected") {
    const ReferenceFixture f;
    std::string text = format_references(f.refs);
    CHECK(code_of([&] { parse_references(text.substr(0, text.size() / 2)); }) == ErrorCode::BadModelFile);
    const auto pos = text.find("fourier_hip");
    std::string renamed = text;
    renamed.replace(pos, 11, "fourier_hop");
    CHECK(code_of([&] { parse_references(renamed); }) == ErrorCode::BadModelFile);
}
