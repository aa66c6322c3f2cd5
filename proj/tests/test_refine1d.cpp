#include "subpix/refine1d.hpp"
#include "subpix/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace subpix;

namespace {

Eigen::VectorXd randomVec(int n, std::mt19937& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; i++) {
        v[i] = g(rng);
    }
    return v;
}

} // namespace

TEST_CASE("parabola vertex through a hand triplet") {
    SubpixelResult r = parabolaRefine({3.0, 1.0, 2.0});
    CHECK(r.delta == doctest::Approx(1.0 / 6.0));
    CHECK(r.status == RefineStatus::Ok);
    // symmetric triplet sits at the center
    CHECK(parabolaRefine({2.0, 1.0, 2.0}).delta == doctest::Approx(0.0));
}

TEST_CASE("parabola degenerates on flat triplets and clamps runaways") {
    SubpixelResult flat = parabolaRefine({1.0, 1.0, 1.0});
    CHECK(flat.status == RefineStatus::DegenerateFallback);
    CHECK(flat.delta == 0.0);

    // nearly linear costs push the vertex far outside the unit cell
    SubpixelResult steep = parabolaRefine({0.0, 1.0, 2.0 + 1e-9});
    CHECK(std::abs(steep.delta) <= 0.5);
    CHECK(steep.status == RefineStatus::Clamped);

    CHECK_THROWS_AS(parabolaRefine({std::nan(""), 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("equiangular fit through a hand triplet") {
    SubpixelResult r = equiangularRefine({3.0, 1.0, 2.0});
    CHECK(r.delta == doctest::Approx(0.25));
    CHECK(r.status == RefineStatus::Ok);
    CHECK(equiangularRefine({1.0, 1.0, 1.0}).status == RefineStatus::DegenerateFallback);
}

TEST_CASE("parabola is exact on sampled parabolas") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    for (int i = 0; i < 50; i++) {
        double v = uni(rng);
        double a = 0.5 + i * 0.1;
        auto q = [&](double x) { return a * (x - v) * (x - v); };
        SubpixelResult r = parabolaRefine({q(-1), q(0), q(1)});
        CHECK(r.delta == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("weighted median picks the lower median") {
    std::vector<double> v{0.2, 0.9};
    std::vector<double> w{0.5, 1.0};
    CHECK(weightedMedian(v, w) == 0.9);

    std::vector<double> v2{0.2, 0.9};
    std::vector<double> w2{1.0, 1.0};
    CHECK(weightedMedian(v2, w2) == 0.2); // tie -> lower

    std::vector<double> v3{5.0};
    std::vector<double> w3{2.0};
    CHECK(weightedMedian(v3, w3) == 5.0);

    std::vector<double> bad{1.0};
    std::vector<double> negw{-1.0};
    CHECK_THROWS_AS(weightedMedian(bad, negw), std::invalid_argument);
}

TEST_CASE("endpoint sources are recovered exactly") {
    std::mt19937 rng(11);
    for (CostKind kind : {CostKind::NCC, CostKind::SSD, CostKind::SAD}) {
        IntervalFeatures f;
        f.ftLo = randomVec(12, rng);
        f.ftHi = randomVec(12, rng);

        f.fs = f.ftLo;
        SubpixelResult lo = kind == CostKind::NCC   ? nccFeatureRefine1d(f)
                            : kind == CostKind::SSD ? ssdFeatureRefine1d(f)
                                                    : sadFeatureRefine1d(f);
        CHECK(lo.delta == doctest::Approx(0.0).epsilon(1e-9));

        f.fs = f.ftHi;
        SubpixelResult hi = kind == CostKind::NCC   ? nccFeatureRefine1d(f)
                            : kind == CostKind::SSD ? ssdFeatureRefine1d(f)
                                                    : sadFeatureRefine1d(f);
        CHECK(hi.delta == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("interior blends are recovered exactly by all three closed forms") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> uni(0.1, 0.9);
    for (int i = 0; i < 100; i++) {
        IntervalFeatures f;
        f.ftLo = randomVec(9 + i % 40, rng);
        f.ftHi = randomVec(9 + i % 40, rng);
        double a = uni(rng);
        f.fs = (1.0 - a) * f.ftLo + a * f.ftHi;

        CHECK(ssdFeatureRefine1d(f).delta == doctest::Approx(a).epsilon(1e-9));
        CHECK(sadFeatureRefine1d(f).delta == doctest::Approx(a).epsilon(1e-9));
        SubpixelResult ncc = nccFeatureRefine1d(f);
        CHECK(ncc.delta == doctest::Approx(a).epsilon(1e-6));
    }
}

TEST_CASE("closed forms match the grid oracle on random instances") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uni(0.15, 0.85);
    int checked = 0;
    for (int i = 0; i < 30; i++) {
        IntervalFeatures f;
        f.ftLo = randomVec(16, rng);
        f.ftHi = randomVec(16, rng);
        f.fs = (1.0 - uni(rng)) * f.ftLo + uni(rng) * f.ftHi + 0.05 * randomVec(16, rng);

        for (CostKind kind : {CostKind::NCC, CostKind::SSD, CostKind::SAD}) {
            SubpixelResult r = kind == CostKind::NCC   ? nccFeatureRefine1d(f)
                               : kind == CostKind::SSD ? ssdFeatureRefine1d(f)
                                                       : sadFeatureRefine1d(f);
            if (r.status != RefineStatus::Ok) {
                continue;
            }
            double oracle = gridOracle1d(f, kind, 1e-4);
            CHECK(std::abs(r.delta - oracle) < 1e-3);
            checked++;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("anti-correlated NCC instances return the better endpoint") {
    IntervalFeatures f;
    f.ftLo = Eigen::VectorXd::Zero(3);
    f.ftHi = Eigen::VectorXd::Zero(3);
    f.fs = Eigen::VectorXd::Zero(3);
    f.ftLo << 1, 0, 0;
    f.ftHi << 0, 1, 0;
    f.fs << -1, -0.5, 0; // negatively correlated with both targets

    SubpixelResult r = nccFeatureRefine1d(f);
    CHECK((r.delta == 0.0 || r.delta == 1.0));
    CHECK(r.status != RefineStatus::Ok);
    CHECK(r.costAtDelta ==
          doctest::Approx(std::min(intervalCostAt(f, CostKind::NCC, 0.0),
                                   intervalCostAt(f, CostKind::NCC, 1.0))));
}

TEST_CASE("degenerate intervals fall back for all cost families") {
    IntervalFeatures f;
    f.ftLo = Eigen::VectorXd::Ones(4);
    f.ftHi = f.ftLo; // zero-length interval
    f.fs = 2.0 * f.ftLo;
    CHECK(ssdFeatureRefine1d(f).status == RefineStatus::DegenerateFallback);
    CHECK(sadFeatureRefine1d(f).status == RefineStatus::DegenerateFallback);
    CHECK(nccFeatureRefine1d(f).status != RefineStatus::Ok);
}

TEST_CASE("interval pair refinement picks the correct side") {
    std::mt19937 rng(19);
    Eigen::VectorXd left = randomVec(10, rng);
    Eigen::VectorXd center = randomVec(10, rng);
    Eigen::VectorXd right = randomVec(10, rng);

    // source sits 0.3 into the right interval
    Eigen::VectorXd fs = 0.7 * center + 0.3 * right;
    SubpixelResult r =
        refineIntervalPair(fs, left, center, right, CostKind::SSD, PairStrategy::SplitBarycentric);
    CHECK(r.delta == doctest::Approx(0.3).epsilon(1e-9));

    // source sits 0.4 into the left interval (delta -0.4)
    fs = 0.4 * left + 0.6 * center;
    r = refineIntervalPair(fs, left, center, right, CostKind::SSD,
                           PairStrategy::SplitBarycentric);
    CHECK(r.delta == doctest::Approx(-0.4).epsilon(1e-9));

    // symmetric strategy solves the relaxed 3-target problem
    r = refineIntervalPair(fs, left, center, right, CostKind::SSD,
                           PairStrategy::SymmetricPredictive);
    CHECK(r.delta == doctest::Approx(-0.4).epsilon(1e-6));
}

TEST_CASE("shimizu averaging recovers synthetic shifts") {
    // the estimator halves pixel-locking rather than removing it, so judge
    // the mean over several pixels instead of any single one
    NdBufferF base = proceduralTexture(40, 60, 3);
    PatchWindow window = makeSquareWindow(5);
    auto meanDelta = [&](double shift) {
        SyntheticPair pair = makeShiftedPair(base, {shift}, 0.0, 1);
        double sum = 0;
        int n = 0;
        for (int row : {10, 15, 20, 25}) {
            for (int col : {15, 25, 35, 45}) {
                SubpixelResult r =
                    shimizuRefine1d(pair.source, pair.target, window, CostKind::ZNCC, row,
                                    col, 0);
                CHECK(r.status != RefineStatus::NotRefinable);
                sum += r.delta;
                n++;
            }
        }
        return sum / n;
    };
    CHECK(std::abs(meanDelta(0.0)) < 0.08);
    CHECK(std::abs(meanDelta(0.3) - 0.3) < 0.12);
}

TEST_CASE("interval cost normalizes after interpolation for NCC") {
    IntervalFeatures f;
    f.ftLo = Eigen::VectorXd::Zero(2);
    f.ftHi = Eigen::VectorXd::Zero(2);
    f.fs = Eigen::VectorXd::Zero(2);
    f.ftLo << 1, 0;
    f.ftHi << 0, 1;
    f.fs << 1, 1;
    // at delta 0.5 the blend is (0.5, 0.5); correlation with fs is perfect
    CHECK(intervalCostAt(f, CostKind::NCC, 0.5) == doctest::Approx(-1.0));
    CHECK(intervalCostAt(f, CostKind::SSD, 0.5) == doctest::Approx(0.5));
    CHECK(intervalCostAt(f, CostKind::SAD, 0.5) == doctest::Approx(1.0));
}
