#ifndef SUBPIX_COST_HPP
#define SUBPIX_COST_HPP

#include "features.hpp"
#include "ndbuffer.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace subpix {

enum class CostKind { NCC, ZNCC, SSD, ZSSD, SAD, ZSAD };

/// NCC family is a similarity (maximize); the others are costs (minimize).
bool maximizes(CostKind kind);

/// Whitening the cost function expects on its inputs for matching.
Whitening matchingWhitening(CostKind kind);

/// Whitening applied to the feature volumes handed to the feature-space
/// refiners. Default pipeline interpolates before normalization, so the
/// NCC family receives un-normalized (but possibly zero-mean) features.
Whitening refinementWhitening(CostKind kind, bool interpolateAfterWhitening);

char const* costName(CostKind kind);

double score(std::span<const float> fs, std::span<const float> ft, CostKind kind);

/// Per-dimension integer disparity intervals [lo, hi].
struct SearchRange {
    std::vector<std::array<int, 2>> bounds;

    int dims() const { return static_cast<int>(bounds.size()); }

    int extent(int i) const {
        return bounds[static_cast<std::size_t>(i)][1] - bounds[static_cast<std::size_t>(i)][0] + 1;
    }

    long long cells() const {
        long long n = 1;
        for (int i = 0; i < dims(); i++) {
            n *= extent(i);
        }
        return n;
    }

    static SearchRange range1d(int lo, int hi) { return {{{lo, hi}}}; }
    static SearchRange range2d(int rowLo, int rowHi, int colLo, int colHi) {
        return {{{rowLo, rowHi}, {colLo, colHi}}};
    }
};

/// Dense cost volume C[p, d] = score(Fs[p], Ft[p + d]).
/// 1D ranges shift the column dimension; 2D ranges shift (row, col).
struct CostVolume {
    NdBufferF data;   // rows x cols x extent(0) x ... x extent(n-1)
    MaskBuffer valid; // same shape
    CostKind costfn = CostKind::SSD;
    SearchRange range;

    int rows() const { return data.dim(0); }
    int cols() const { return data.dim(1); }
};

CostVolume buildCostVolume(FeatureVolume const& Fs, FeatureVolume const& Ft,
                           SearchRange const& range, CostKind costfn);

struct DiscreteDisparity {
    std::vector<int> d;
    double score = 0;
    bool valid = false;
};

/// Extremum cell at pixel (row, col); ties break toward the
/// lexicographically smallest disparity.
DiscreteDisparity discreteBest(CostVolume const& cv, int row, int col);

namespace reference {

/// Plain serial triple loop, kept as oracle for the parallel kernel.
CostVolume buildCostVolumeSerial(FeatureVolume const& Fs, FeatureVolume const& Ft,
                                 SearchRange const& range, CostKind costfn);

} // namespace reference

} // namespace subpix

#endif
