#include "subpix/patching.hpp"

#include <doctest.h>

using namespace subpix;

TEST_CASE("square window enumerates offsets row-major, channel innermost") {
    PatchWindow w = makeSquareWindow(3);
    CHECK(w.spatialRank == 2);
    CHECK(w.nFeatures() == 9);
    CHECK(w.offsets[0] == std::vector<int>{-1, -1});
    CHECK(w.offsets[4] == std::vector<int>{0, 0});
    CHECK(w.offsets[8] == std::vector<int>{1, 1});

    PatchWindow wc = makeSquareWindow(3, 3);
    CHECK(wc.nFeatures() == 27);
    CHECK(wc.offsets[0] == std::vector<int>{-1, -1, 0});
    CHECK(wc.offsets[1] == std::vector<int>{-1, -1, 1});
    CHECK(wc.offsets[3] == std::vector<int>{-1, 0, 0});
}

TEST_CASE("square window rejects invalid sides") {
    CHECK_THROWS_AS(makeSquareWindow(2), std::invalid_argument);
    CHECK_THROWS_AS(makeSquareWindow(-1), std::invalid_argument);
    CHECK_THROWS_AS(makeSquareWindow(3, 0), std::invalid_argument);
}

TEST_CASE("patch with clamp border replicates edges") {
    NdBufferF img({2, 2}, 0.f);
    img(0, 0) = 1.f;
    img(0, 1) = 2.f;
    img(1, 0) = 3.f;
    img(1, 1) = 4.f;

    NdBufferF p = patch(img, makeSquareWindow(3), BorderPolicy::clamp());
    REQUIRE(p.shape() == std::vector<int>{2, 2, 9});
    // top-left pixel: all out-of-bounds samples clamp to the corner
    CHECK(p(0, 0, 0) == 1.f); // (-1,-1) -> (0,0)
    CHECK(p(0, 0, 4) == 1.f); // center
    CHECK(p(0, 0, 8) == 4.f); // (1,1)
    CHECK(p(1, 1, 0) == 1.f);
}

TEST_CASE("patch with constant border fills the given value") {
    NdBufferF img({2, 2}, 1.f);
    NdBufferF p = patch(img, makeSquareWindow(3), BorderPolicy::constant(7.f));
    CHECK(p(0, 0, 0) == 7.f);
    CHECK(p(0, 0, 4) == 1.f);
}

TEST_CASE("patch with reject border shrinks the output") {
    NdBufferF img({4, 5}, 0.f);
    for (int r = 0; r < 4; r++) {
        for (int c = 0; c < 5; c++) {
            img(r, c) = static_cast<float>(10 * r + c);
        }
    }
    NdBufferF p = patch(img, makeSquareWindow(3), BorderPolicy::reject());
    REQUIRE(p.shape() == std::vector<int>{2, 3, 9});
    // output (0,0) is input (1,1); first offset (-1,-1) -> input (0,0)
    CHECK(p(0, 0, 0) == 0.f);
    CHECK(p(0, 0, 4) == 11.f);
    CHECK(p(1, 2, 8) == 34.f);
}

TEST_CASE("patch of a 3-channel image gathers the named channel") {
    NdBufferF img({2, 2, 3}, 0.f);
    img(0, 0, 0) = 1.f;
    img(0, 0, 1) = 2.f;
    img(0, 0, 2) = 3.f;
    NdBufferF p = patch(img, makeSquareWindow(1, 3), BorderPolicy::clamp());
    REQUIRE(p.shape() == std::vector<int>{2, 2, 3});
    CHECK(p(0, 0, 0) == 1.f);
    CHECK(p(0, 0, 1) == 2.f);
    CHECK(p(0, 0, 2) == 3.f);
}
