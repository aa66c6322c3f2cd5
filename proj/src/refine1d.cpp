#include "subpix/refine1d.hpp"
#include "subpix/refine_nd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace subpix {

namespace {

void checkFinite(CostTriplet const& t) {
    if (std::isnan(t.cMinus) || std::isnan(t.c0) || std::isnan(t.cPlus)) {
        throw std::invalid_argument("cost triplet contains NaN");
    }
}

void checkFinite(IntervalFeatures const& f) {
    if (f.fs.hasNaN() || f.ftLo.hasNaN() || f.ftHi.hasNaN()) {
        throw std::invalid_argument("interval features contain NaN");
    }
    if (f.fs.size() != f.ftLo.size() || f.fs.size() != f.ftHi.size() || f.fs.size() < 1) {
        throw std::invalid_argument("interval features length mismatch");
    }
}

SubpixelResult betterEndpoint(IntervalFeatures const& f, CostKind costfn, RefineStatus status) {
    double c0 = intervalCostAt(f, costfn, 0.0);
    double c1 = intervalCostAt(f, costfn, 1.0);
    SubpixelResult r;
    r.delta = (c1 < c0) ? 1.0 : 0.0;
    r.status = status;
    r.costAtDelta = std::min(c0, c1);
    return r;
}

SubpixelResult clampToInterval(double x, IntervalFeatures const& f, CostKind costfn) {
    SubpixelResult r;
    r.status = RefineStatus::Ok;
    if (x < 0.0 || x > 1.0) {
        x = std::clamp(x, 0.0, 1.0);
        r.status = RefineStatus::Clamped;
    }
    r.delta = x;
    r.costAtDelta = intervalCostAt(f, costfn, x);
    return r;
}

} // namespace

double intervalCostAt(IntervalFeatures const& f, CostKind costfn, double delta) {

    Eigen::VectorXd v = (1.0 - delta) * f.ftLo + delta * f.ftHi;

    switch (costfn) {
    case CostKind::NCC:
    case CostKind::ZNCC: {
        double nv = v.norm();
        double ns = f.fs.norm();
        if (nv < kDegenerateNorm || ns < kDegenerateNorm) {
            return std::numeric_limits<double>::infinity();
        }
        return -f.fs.dot(v) / (nv * ns);
    }
    case CostKind::SSD:
    case CostKind::ZSSD:
        return (f.fs - v).squaredNorm();
    case CostKind::SAD:
    case CostKind::ZSAD:
        return (f.fs - v).lpNorm<1>();
    }
    return 0;
}

SubpixelResult parabolaRefine(CostTriplet const& t) {

    checkFinite(t);

    SubpixelResult r;
    double denom = t.cPlus - 2.0 * t.c0 + t.cMinus;

    if (std::abs(denom) < kDegenerateDenom) {
        r.status = RefineStatus::DegenerateFallback;
        r.costAtDelta = t.c0;
        return r;
    }

    double x = (t.cMinus - t.cPlus) / (2.0 * denom);
    r.status = RefineStatus::Ok;
    if (x < -0.5 || x > 0.5) {
        x = std::clamp(x, -0.5, 0.5);
        r.status = RefineStatus::Clamped;
    }
    r.delta = x;
    // fitted parabola value
    double b = (t.cPlus - t.cMinus) / 2.0;
    r.costAtDelta = t.c0 + b * x + (denom / 2.0) * x * x;
    return r;
}

SubpixelResult equiangularRefine(CostTriplet const& t) {

    checkFinite(t);

    SubpixelResult r;
    double slopeLeft = t.c0 - t.cMinus;

    if (std::abs(slopeLeft) < kDegenerateDenom) {
        r.status = RefineStatus::DegenerateFallback;
        r.costAtDelta = t.c0;
        return r;
    }

    double zeta = std::copysign(1.0, slopeLeft) *
                  std::max(std::abs(slopeLeft), std::abs(t.cPlus - t.c0));

    if (std::abs(zeta) < kDegenerateDenom) {
        r.status = RefineStatus::DegenerateFallback;
        r.costAtDelta = t.c0;
        return r;
    }

    double x = (t.cPlus - t.cMinus) / (2.0 * zeta);
    r.status = RefineStatus::Ok;
    if (x < -0.5 || x > 0.5) {
        x = std::clamp(x, -0.5, 0.5);
        r.status = RefineStatus::Clamped;
    }
    r.delta = x;
    r.costAtDelta = zeta * (x + 1.0) + t.cMinus;
    return r;
}

SubpixelResult nccFeatureRefine1d(IntervalFeatures const& f) {

    checkFinite(f);

    if (f.ftLo.norm() < kDegenerateNorm || f.ftHi.norm() < kDegenerateNorm ||
        f.fs.norm() < kDegenerateNorm) {
        return betterEndpoint(f, CostKind::NCC, RefineStatus::DegenerateFallback);
    }

    double s0 = f.fs.dot(f.ftLo);
    double s1 = f.fs.dot(f.ftHi);
    double g00 = f.ftLo.dot(f.ftLo);
    double g01 = f.ftLo.dot(f.ftHi);
    double g11 = f.ftHi.dot(f.ftHi);

    double num = s0 * g01 - s1 * g00;
    double den = s0 * (g01 - g11) + s1 * (g01 - g00);

    if (std::abs(den) < kDegenerateDenom) {
        return betterEndpoint(f, CostKind::NCC, RefineStatus::DegenerateFallback);
    }
    if (den > 0) {
        // stationary point is a correlation minimum; the maximum over the
        // interval sits at an endpoint
        return betterEndpoint(f, CostKind::NCC, RefineStatus::Clamped);
    }

    return clampToInterval(num / den, f, CostKind::NCC);
}

SubpixelResult ssdFeatureRefine1d(IntervalFeatures const& f) {

    checkFinite(f);

    Eigen::VectorXd g = f.ftHi - f.ftLo;
    double g2 = g.squaredNorm();

    if (g2 < kDegenerateDenom) {
        return betterEndpoint(f, CostKind::SSD, RefineStatus::DegenerateFallback);
    }

    return clampToInterval(g.dot(f.fs - f.ftLo) / g2, f, CostKind::SSD);
}

double weightedMedian(std::span<const double> values, std::span<const double> weights) {

    if (values.size() != weights.size() || values.empty()) {
        throw std::invalid_argument("weightedMedian: length mismatch or empty input");
    }

    double total = 0;
    for (double w : weights) {
        if (w < 0 || std::isnan(w)) {
            throw std::invalid_argument("weightedMedian: negative or NaN weight");
        }
        total += w;
    }
    if (total <= 0) {
        throw std::invalid_argument("weightedMedian: total weight must be positive");
    }

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    double cum = 0;
    for (std::size_t i : order) {
        cum += weights[i];
        if (2.0 * cum >= total) {
            return values[i];
        }
    }
    return values[order.back()];
}

SubpixelResult sadFeatureRefine1d(IntervalFeatures const& f) {

    checkFinite(f);

    std::vector<double> candidates;
    std::vector<double> w;
    candidates.reserve(static_cast<std::size_t>(f.fs.size()));
    w.reserve(static_cast<std::size_t>(f.fs.size()));

    for (Eigen::Index c = 0; c < f.fs.size(); c++) {
        double g = f.ftHi[c] - f.ftLo[c];
        if (std::abs(g) < kDegenerateDenom) {
            continue;
        }
        candidates.push_back((f.fs[c] - f.ftLo[c]) / g);
        w.push_back(std::abs(g));
    }

    if (candidates.empty()) {
        return betterEndpoint(f, CostKind::SAD, RefineStatus::DegenerateFallback);
    }

    return clampToInterval(weightedMedian(candidates, w), f, CostKind::SAD);
}

namespace {

SubpixelResult refine1dForCost(IntervalFeatures const& f, CostKind costfn) {
    switch (costfn) {
    case CostKind::NCC:
    case CostKind::ZNCC:
        return nccFeatureRefine1d(f);
    case CostKind::SSD:
    case CostKind::ZSSD:
        return ssdFeatureRefine1d(f);
    case CostKind::SAD:
    case CostKind::ZSAD:
        return sadFeatureRefine1d(f);
    }
    return {};
}

} // namespace

SubpixelResult refineIntervalPair(Eigen::VectorXd const& fs, Eigen::VectorXd const& ftLeft,
                                  Eigen::VectorXd const& ftCenter, Eigen::VectorXd const& ftRight,
                                  CostKind costfn, PairStrategy strategy) {

    if (fs.size() != ftLeft.size() || fs.size() != ftCenter.size() || fs.size() != ftRight.size()) {
        throw std::invalid_argument("refineIntervalPair: feature length mismatch");
    }

    if (strategy == PairStrategy::SplitBarycentric) {

        IntervalFeatures left{fs, ftLeft, ftCenter};
        IntervalFeatures right{fs, ftCenter, ftRight};

        SubpixelResult rl = refine1dForCost(left, costfn);
        SubpixelResult rr = refine1dForCost(right, costfn);

        bool leftUsable = rl.status != RefineStatus::DegenerateFallback;
        bool rightUsable = rr.status != RefineStatus::DegenerateFallback;

        if (!leftUsable && !rightUsable) {
            return {0.0, RefineStatus::DegenerateFallback, intervalCostAt(right, costfn, 0.0)};
        }

        SubpixelResult out;
        if (leftUsable && (!rightUsable || rl.costAtDelta < rr.costAtDelta)) {
            out = rl;
            out.delta = rl.delta - 1.0;
        } else {
            out = rr;
        }
        return out;
    }

    // symmetric predictive: relaxed 3-target problem with D = [-1, +1, 0]
    TargetSet ts;
    ts.targets.resize(fs.size(), 3);
    ts.targets.col(0) = ftLeft;
    ts.targets.col(1) = ftRight;
    ts.targets.col(2) = ftCenter;
    ts.D.resize(1, 3);
    ts.D << -1.0, 1.0, 0.0;

    BarycentricSolution sol = refineNdForCost(fs, ts, costfn);

    if (sol.status == RefineStatus::DegenerateFallback) {
        IntervalFeatures right{fs, ftCenter, ftRight};
        return {0.0, RefineStatus::DegenerateFallback, intervalCostAt(right, costfn, 0.0)};
    }

    SubpixelResult r;
    r.delta = sol.dHat[0];
    r.status = sol.status;
    if (r.delta < -1.0 || r.delta > 1.0) {
        r.delta = std::clamp(r.delta, -1.0, 1.0);
        r.status = RefineStatus::Clamped;
    }

    if (r.delta <= 0.0) {
        IntervalFeatures left{fs, ftLeft, ftCenter};
        r.costAtDelta = intervalCostAt(left, costfn, r.delta + 1.0);
    } else {
        IntervalFeatures right{fs, ftCenter, ftRight};
        r.costAtDelta = intervalCostAt(right, costfn, r.delta);
    }
    return r;
}

namespace {

Eigen::VectorXd gatherVector(NdBufferF const& image, PatchWindow const& window, int r, int c) {

    bool hasChannels = image.rank() == 3;
    Eigen::VectorXd v(window.nFeatures());

    for (int k = 0; k < window.nFeatures(); k++) {
        auto const& off = window.offsets[static_cast<std::size_t>(k)];
        int y = std::clamp(r + off[0], 0, image.dim(0) - 1);
        int x = std::clamp(c + off[1], 0, image.dim(1) - 1);
        v[k] = hasChannels ? image(y, x, off[2]) : image(y, x);
    }
    return v;
}

void applyWhitening(Eigen::VectorXd& v, Whitening mode, bool& degenerate) {
    if (mode == Whitening::ZeroMean || mode == Whitening::ZeroMeanNormalized) {
        v.array() -= v.mean();
    }
    if (mode == Whitening::Normalized || mode == Whitening::ZeroMeanNormalized) {
        double n = v.norm();
        if (n < kDegenerateNorm) {
            degenerate = true;
        } else {
            v /= n;
        }
    }
}

// minimization-convention cost between whitened source and the target patch
// at column q of the (possibly half-pixel shifted) target image
double localCost(Eigen::VectorXd const& fs, NdBufferF const& target, PatchWindow const& window,
                 CostKind costfn, int row, int q, bool& degenerate) {

    Eigen::VectorXd ft = gatherVector(target, window, row, q);
    applyWhitening(ft, matchingWhitening(costfn), degenerate);

    double s;
    switch (costfn) {
    case CostKind::NCC:
    case CostKind::ZNCC:
        s = -fs.dot(ft);
        break;
    case CostKind::SSD:
    case CostKind::ZSSD:
        s = (fs - ft).squaredNorm();
        break;
    default:
        s = (fs - ft).lpNorm<1>();
        break;
    }
    return s;
}

NdBufferF halfPixelShift(NdBufferF const& image) {
    NdBufferF out(image.shape());
    bool hasChannels = image.rank() == 3;
    int rows = image.dim(0);
    int cols = image.dim(1);
    int nc = hasChannels ? image.dim(2) : 1;

    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            int cn = std::min(c + 1, cols - 1);
            for (int k = 0; k < nc; k++) {
                float a = hasChannels ? image(r, c, k) : image(r, c);
                float b = hasChannels ? image(r, cn, k) : image(r, cn);
                float v = 0.5f * (a + b);
                if (hasChannels) {
                    out(r, c, k) = v;
                } else {
                    out(r, c) = v;
                }
            }
        }
    }
    return out;
}

} // namespace

SubpixelResult shimizuRefine1d(NdBufferF const& source, NdBufferF const& target,
                               PatchWindow const& window, CostKind costfn,
                               int row, int col, int d) {

    bool degenerate = false;
    Eigen::VectorXd fs = gatherVector(source, window, row, col);
    applyWhitening(fs, matchingWhitening(costfn), degenerate);

    CostTriplet base;
    base.cMinus = localCost(fs, target, window, costfn, row, col + d - 1, degenerate);
    base.c0 = localCost(fs, target, window, costfn, row, col + d, degenerate);
    base.cPlus = localCost(fs, target, window, costfn, row, col + d + 1, degenerate);

    if (degenerate) {
        return {0.0, RefineStatus::DegenerateFallback, base.c0};
    }

    SubpixelResult first = parabolaRefine(base);
    if (first.status == RefineStatus::DegenerateFallback) {
        return first;
    }
    double est1 = d + first.delta;

    // target interpolated by +0.5 px: content moves half a pixel toward
    // lower coordinates, so estimates on the shifted pair map back via +0.5
    NdBufferF shifted = halfPixelShift(target);

    double costs[5];
    bool shiftDegenerate = false;
    for (int i = 0; i < 5; i++) {
        costs[i] = localCost(fs, shifted, window, costfn, row, col + d - 2 + i, shiftDegenerate);
    }

    int bestIdx = 1;
    for (int i = 2; i <= 3; i++) {
        if (costs[i] < costs[bestIdx]) {
            bestIdx = i;
        }
    }

    CostTriplet shiftedTriplet{costs[bestIdx - 1], costs[bestIdx], costs[bestIdx + 1]};
    SubpixelResult second = shiftDegenerate
                                ? SubpixelResult{0.0, RefineStatus::DegenerateFallback, 0.0}
                                : parabolaRefine(shiftedTriplet);

    if (second.status == RefineStatus::DegenerateFallback) {
        SubpixelResult r = first;
        r.status = RefineStatus::DegenerateFallback;
        return r;
    }

    double est2 = (d - 2 + bestIdx) + second.delta + 0.5;

    SubpixelResult r;
    r.delta = 0.5 * (est1 + est2) - d;
    r.status = RefineStatus::Ok;
    if (r.delta < -0.5 || r.delta > 0.5) {
        r.delta = std::clamp(r.delta, -0.5, 0.5);
        r.status = RefineStatus::Clamped;
    }
    r.costAtDelta = first.costAtDelta;
    return r;
}

} // namespace subpix
