#include "subpix/features.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace subpix;

namespace {

NdBufferF randomImage(int rows, int cols, unsigned seed) {
    NdBufferF img({rows, cols}, 0.f);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> uni(0.f, 1.f);
    for (std::size_t i = 0; i < img.size(); i++) {
        img.flat(i) = uni(rng);
    }
    return img;
}

} // namespace

TEST_CASE("feature volume has one vector per pixel") {
    NdBufferF img = randomImage(6, 7, 1);
    FeatureVolume fv = buildFeatureVolume(img, makeSquareWindow(3), BorderPolicy::clamp());
    CHECK(fv.rows() == 6);
    CHECK(fv.cols() == 7);
    CHECK(fv.channels() == 9);
    CHECK(fv.whitening == Whitening::Raw);
    CHECK(fv.valid(0, 0) == 1);
    // center offset reproduces the pixel itself
    CHECK(fv.vec(3, 3)[4] == img(3, 3));
}

TEST_CASE("zero-mean whitening removes the per-vector mean") {
    FeatureVolume fv =
        buildFeatureVolume(randomImage(5, 5, 2), makeSquareWindow(3), BorderPolicy::clamp());
    FeatureVolume zf = whiten(fv, Whitening::ZeroMean);
    for (int r = 0; r < 5; r++) {
        for (int c = 0; c < 5; c++) {
            double mean = 0;
            for (int k = 0; k < zf.channels(); k++) {
                mean += zf.vec(r, c)[k];
            }
            CHECK(std::abs(mean / zf.channels()) < 1e-6);
        }
    }
    CHECK(zf.whitening == Whitening::ZeroMean);
}

TEST_CASE("normalized whitening yields unit vectors") {
    FeatureVolume fv =
        buildFeatureVolume(randomImage(4, 4, 3), makeSquareWindow(3), BorderPolicy::clamp());
    for (Whitening mode : {Whitening::Normalized, Whitening::ZeroMeanNormalized}) {
        FeatureVolume nf = whiten(fv, mode);
        for (int r = 0; r < 4; r++) {
            for (int c = 0; c < 4; c++) {
                double n2 = 0;
                for (int k = 0; k < nf.channels(); k++) {
                    n2 += static_cast<double>(nf.vec(r, c)[k]) * nf.vec(r, c)[k];
                }
                CHECK(std::abs(std::sqrt(n2) - 1.0) < 1e-5);
            }
        }
    }
}

TEST_CASE("constant patches degenerate under zero-mean normalization") {
    NdBufferF img({4, 4}, 0.5f);
    FeatureVolume fv = buildFeatureVolume(img, makeSquareWindow(3), BorderPolicy::clamp());
    FeatureVolume znf = whiten(fv, Whitening::ZeroMeanNormalized);
    CHECK(znf.valid(2, 2) == 0);
    // plain normalization of a nonzero constant vector stays valid
    FeatureVolume nf = whiten(fv, Whitening::Normalized);
    CHECK(nf.valid(2, 2) == 1);
}

TEST_CASE("double whitening is rejected") {
    FeatureVolume fv =
        buildFeatureVolume(randomImage(3, 3, 4), makeSquareWindow(3), BorderPolicy::clamp());
    FeatureVolume zf = whiten(fv, Whitening::ZeroMean);
    CHECK_THROWS_AS(whiten(zf, Whitening::Normalized), std::logic_error);
    // Raw is a no-op and allowed
    CHECK_NOTHROW(whiten(zf, Whitening::Raw));
}
