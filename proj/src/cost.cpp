#include "subpix/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace subpix {

bool maximizes(CostKind kind) {
    return kind == CostKind::NCC || kind == CostKind::ZNCC;
}

Whitening matchingWhitening(CostKind kind) {
    switch (kind) {
    case CostKind::NCC:
        return Whitening::Normalized;
    case CostKind::ZNCC:
        return Whitening::ZeroMeanNormalized;
    case CostKind::SSD:
    case CostKind::SAD:
        return Whitening::Raw;
    case CostKind::ZSSD:
    case CostKind::ZSAD:
        return Whitening::ZeroMean;
    }
    return Whitening::Raw;
}

Whitening refinementWhitening(CostKind kind, bool interpolateAfterWhitening) {
    if (interpolateAfterWhitening) {
        return matchingWhitening(kind);
    }
    switch (kind) {
    case CostKind::NCC:
    case CostKind::SSD:
    case CostKind::SAD:
        return Whitening::Raw;
    case CostKind::ZNCC:
    case CostKind::ZSSD:
    case CostKind::ZSAD:
        return Whitening::ZeroMean;
    }
    return Whitening::Raw;
}

char const* costName(CostKind kind) {
    switch (kind) {
    case CostKind::NCC:
        return "ncc";
    case CostKind::ZNCC:
        return "zncc";
    case CostKind::SSD:
        return "ssd";
    case CostKind::ZSSD:
        return "zssd";
    case CostKind::SAD:
        return "sad";
    case CostKind::ZSAD:
        return "zsad";
    }
    return "?";
}

double score(std::span<const float> fs, std::span<const float> ft, CostKind kind) {

    if (fs.size() != ft.size()) {
        throw std::invalid_argument("score: feature length mismatch");
    }

    double acc = 0;
    switch (kind) {
    case CostKind::NCC:
    case CostKind::ZNCC:
        for (std::size_t i = 0; i < fs.size(); i++) {
            acc += static_cast<double>(fs[i]) * static_cast<double>(ft[i]);
        }
        break;
    case CostKind::SSD:
    case CostKind::ZSSD:
        for (std::size_t i = 0; i < fs.size(); i++) {
            double d = static_cast<double>(fs[i]) - static_cast<double>(ft[i]);
            acc += d * d;
        }
        break;
    case CostKind::SAD:
    case CostKind::ZSAD:
        for (std::size_t i = 0; i < fs.size(); i++) {
            acc += std::abs(static_cast<double>(fs[i]) - static_cast<double>(ft[i]));
        }
        break;
    }

    if (std::isnan(acc)) {
        throw std::invalid_argument("score: NaN input");
    }
    return acc;
}

namespace {

void checkInputs(FeatureVolume const& Fs, FeatureVolume const& Ft, SearchRange const& range) {
    if (Fs.data.shape() != Ft.data.shape()) {
        throw std::invalid_argument("buildCostVolume: feature volumes differ in shape");
    }
    if (range.dims() < 1 || range.cells() < 1) {
        throw std::invalid_argument("buildCostVolume: empty search range");
    }
    for (auto const& b : range.bounds) {
        if (b[0] > b[1]) {
            throw std::invalid_argument("buildCostVolume: search range lo > hi");
        }
    }
    if (range.dims() > 2) {
        throw std::invalid_argument("buildCostVolume: drivers support 1D and 2D ranges");
    }
}

// Target pixel for disparity cell d: 1D ranges shift columns,
// 2D ranges shift (row, col).
inline void targetPixel(SearchRange const& range, int r, int c,
                        std::span<const int> d, int& tr, int& tc) {
    if (range.dims() == 1) {
        tr = r;
        tc = c + d[0];
    } else {
        tr = r + d[0];
        tc = c + d[1];
    }
}

CostVolume makeEmptyVolume(FeatureVolume const& Fs, SearchRange const& range, CostKind costfn) {
    std::vector<int> shape{Fs.rows(), Fs.cols()};
    for (int i = 0; i < range.dims(); i++) {
        shape.push_back(range.extent(i));
    }
    CostVolume cv;
    cv.data = NdBufferF(shape, 0.f);
    cv.valid = MaskBuffer(shape, 0);
    cv.costfn = costfn;
    cv.range = range;
    return cv;
}

void fillPixel(CostVolume& cv, FeatureVolume const& Fs, FeatureVolume const& Ft,
               SearchRange const& range, CostKind costfn, int r, int c) {

    int nc = Fs.channels();
    long long nCells = range.cells();

    std::span<const float> fs(Fs.vec(r, c), static_cast<std::size_t>(nc));
    bool srcValid = Fs.valid(r, c) != 0;

    std::size_t pixBase = (static_cast<std::size_t>(r) * static_cast<std::size_t>(Fs.cols()) +
                           static_cast<std::size_t>(c)) *
                          static_cast<std::size_t>(nCells);

    for (long long cell = 0; cell < nCells; cell++) {

        int d[2] = {0, 0};
        long long rem = cell;
        for (int i = range.dims() - 1; i >= 0; i--) {
            d[i] = static_cast<int>(rem % range.extent(i)) + range.bounds[static_cast<std::size_t>(i)][0];
            rem /= range.extent(i);
        }

        int tr = 0, tc = 0;
        targetPixel(range, r, c, std::span<const int>(d, static_cast<std::size_t>(range.dims())),
                    tr, tc);

        if (!srcValid || tr < 0 || tr >= Fs.rows() || tc < 0 || tc >= Fs.cols() ||
            Ft.valid(tr, tc) == 0) {
            continue;
        }

        std::span<const float> ft(Ft.vec(tr, tc), static_cast<std::size_t>(nc));
        cv.data.flat(pixBase + static_cast<std::size_t>(cell)) =
            static_cast<float>(score(fs, ft, costfn));
        cv.valid.flat(pixBase + static_cast<std::size_t>(cell)) = 1;
    }
}

} // namespace

CostVolume buildCostVolume(FeatureVolume const& Fs, FeatureVolume const& Ft,
                           SearchRange const& range, CostKind costfn) {

    checkInputs(Fs, Ft, range);
    CostVolume cv = makeEmptyVolume(Fs, range, costfn);

    int rows = Fs.rows();
    int cols = Fs.cols();

    #pragma omp parallel for schedule(dynamic, 8)
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            fillPixel(cv, Fs, Ft, range, costfn, r, c);
        }
    }

    return cv;
}

DiscreteDisparity discreteBest(CostVolume const& cv, int row, int col) {

    bool maxi = maximizes(cv.costfn);
    long long nCells = cv.range.cells();

    std::size_t pixBase = (static_cast<std::size_t>(row) * static_cast<std::size_t>(cv.cols()) +
                           static_cast<std::size_t>(col)) *
                          static_cast<std::size_t>(nCells);

    DiscreteDisparity best;
    best.d.assign(static_cast<std::size_t>(cv.range.dims()), 0);

    // Lexicographic scan order over disparities matches cell order, so the
    // first strict improvement rule realizes smallest-disparity tie-breaking.
    for (long long cell = 0; cell < nCells; cell++) {
        if (cv.valid.flat(pixBase + static_cast<std::size_t>(cell)) == 0) {
            continue;
        }
        double s = cv.data.flat(pixBase + static_cast<std::size_t>(cell));
        bool better = !best.valid || (maxi ? s > best.score : s < best.score);
        if (better) {
            best.score = s;
            best.valid = true;
            long long rem = cell;
            for (int i = cv.range.dims() - 1; i >= 0; i--) {
                best.d[static_cast<std::size_t>(i)] =
                    static_cast<int>(rem % cv.range.extent(i)) +
                    cv.range.bounds[static_cast<std::size_t>(i)][0];
                rem /= cv.range.extent(i);
            }
        }
    }

    return best;
}

namespace reference {

CostVolume buildCostVolumeSerial(FeatureVolume const& Fs, FeatureVolume const& Ft,
                                 SearchRange const& range, CostKind costfn) {

    checkInputs(Fs, Ft, range);
    CostVolume cv = makeEmptyVolume(Fs, range, costfn);

    for (int r = 0; r < Fs.rows(); r++) {
        for (int c = 0; c < Fs.cols(); c++) {
            fillPixel(cv, Fs, Ft, range, costfn, r, c);
        }
    }

    return cv;
}

} // namespace reference

} // namespace subpix
