#include "subpix/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace subpix {

namespace {

void checkShapes(DisparityField const& a, DisparityField const& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.dims() != b.dims()) {
        throw std::invalid_argument("eval: field shape mismatch");
    }
}

void checkMask(DisparityField const& a, MaskBuffer const& mask) {
    if (mask.rank() != 2 || mask.shape()[0] != a.rows() || mask.shape()[1] != a.cols()) {
        throw std::invalid_argument("eval: mask shape mismatch");
    }
}

} // namespace

MaskBuffer inlierMask(DisparityField const& dRound, DisparityField const& gt, double threshold) {

    checkShapes(dRound, gt);
    MaskBuffer mask({dRound.rows(), dRound.cols()}, 0);

    for (int r = 0; r < dRound.rows(); r++) {
        for (int c = 0; c < dRound.cols(); c++) {
            if (dRound.valid(r, c) == 0 || gt.valid(r, c) == 0) {
                continue;
            }
            double worst = 0;
            float const* d = dRound.vec(r, c);
            float const* g = gt.vec(r, c);
            for (int k = 0; k < dRound.dims(); k++) {
                worst = std::max(worst, std::abs(static_cast<double>(d[k]) - g[k]));
            }
            if (worst < threshold) {
                mask(r, c) = 1;
            }
        }
    }
    return mask;
}

double mae(DisparityField const& dHat, DisparityField const& gt, MaskBuffer const& mask) {

    checkShapes(dHat, gt);
    checkMask(dHat, mask);
    if (dHat.dims() != 1) {
        throw std::invalid_argument("mae: 1D fields required");
    }

    double acc = 0;
    long long n = 0;
    for (int r = 0; r < dHat.rows(); r++) {
        for (int c = 0; c < dHat.cols(); c++) {
            if (mask(r, c) == 0) {
                continue;
            }
            acc += std::abs(static_cast<double>(dHat.vec(r, c)[0]) - gt.vec(r, c)[0]);
            n++;
        }
    }
    if (n == 0) {
        throw std::domain_error("mae: empty mask");
    }
    return acc / static_cast<double>(n);
}

double md(DisparityField const& dHat, DisparityField const& gt, MaskBuffer const& mask) {

    checkShapes(dHat, gt);
    checkMask(dHat, mask);

    double acc = 0;
    long long n = 0;
    for (int r = 0; r < dHat.rows(); r++) {
        for (int c = 0; c < dHat.cols(); c++) {
            if (mask(r, c) == 0) {
                continue;
            }
            double norm2 = 0;
            float const* d = dHat.vec(r, c);
            float const* g = gt.vec(r, c);
            for (int k = 0; k < dHat.dims(); k++) {
                double e = static_cast<double>(d[k]) - g[k];
                norm2 += e * e;
            }
            acc += std::sqrt(norm2);
            n++;
        }
    }
    if (n == 0) {
        throw std::domain_error("md: empty mask");
    }
    return acc / static_cast<double>(n);
}

double rmse(DisparityField const& dHat, DisparityField const& gt, MaskBuffer const& mask) {

    checkShapes(dHat, gt);
    checkMask(dHat, mask);
    if (dHat.dims() != 1) {
        throw std::invalid_argument("rmse: 1D fields required");
    }

    double acc = 0;
    long long n = 0;
    for (int r = 0; r < dHat.rows(); r++) {
        for (int c = 0; c < dHat.cols(); c++) {
            if (mask(r, c) == 0) {
                continue;
            }
            double e = static_cast<double>(dHat.vec(r, c)[0]) - gt.vec(r, c)[0];
            acc += e * e;
            n++;
        }
    }
    if (n == 0) {
        throw std::domain_error("rmse: empty mask");
    }
    return std::sqrt(acc / static_cast<double>(n));
}

SnrResult snrPixelLocking(DisparityField const& dHat, DisparityField const& dRound,
                          DisparityField const& gt, MaskBuffer const& mask) {

    checkShapes(dHat, gt);
    checkShapes(dRound, gt);
    checkMask(dHat, mask);
    if (dHat.dims() != 1) {
        throw std::invalid_argument("snrPixelLocking: 1D fields required");
    }

    SnrResult out;
    out.bins.resize(kSnrBins);
    for (int b = 0; b < kSnrBins; b++) {
        out.bins[static_cast<std::size_t>(b)].lo = -0.5 + b / static_cast<double>(kSnrBins);
        out.bins[static_cast<std::size_t>(b)].hi = -0.5 + (b + 1) / static_cast<double>(kSnrBins);
    }

    // fraction of the true disparity relative to the discrete match,
    // wrapped to [-0.5, 0.5)
    auto binOf = [](double f) {
        f -= std::floor(f + 0.5);
        if (f >= 0.5) {
            f = -0.5;
        }
        int b = static_cast<int>(std::floor((f + 0.5) * kSnrBins));
        return std::clamp(b, 0, kSnrBins - 1);
    };

    double errSum = 0;
    long long n = 0;
    for (int r = 0; r < dHat.rows(); r++) {
        for (int c = 0; c < dHat.cols(); c++) {
            if (mask(r, c) == 0) {
                continue;
            }
            double e = static_cast<double>(dHat.vec(r, c)[0]) - gt.vec(r, c)[0];
            int b = binOf(gt.vec(r, c)[0] - dRound.vec(r, c)[0]);
            out.bins[static_cast<std::size_t>(b)].meanError += e;
            out.bins[static_cast<std::size_t>(b)].count++;
            errSum += e;
            n++;
        }
    }
    if (n == 0) {
        throw std::domain_error("snrPixelLocking: empty mask");
    }

    double globalMean = errSum / static_cast<double>(n);
    for (auto& b : out.bins) {
        if (b.count > 0) {
            b.meanError /= static_cast<double>(b.count);
        }
    }

    double signal = 0;
    double residual = 0;
    for (int r = 0; r < dHat.rows(); r++) {
        for (int c = 0; c < dHat.cols(); c++) {
            if (mask(r, c) == 0) {
                continue;
            }
            double e = static_cast<double>(dHat.vec(r, c)[0]) - gt.vec(r, c)[0];
            int b = binOf(gt.vec(r, c)[0] - dRound.vec(r, c)[0]);
            double eps = out.bins[static_cast<std::size_t>(b)].meanError - globalMean;
            signal += eps * eps;
            residual += (e - eps) * (e - eps);
        }
    }

    if (signal <= 0) {
        out.snrLinear = 0;
        out.snrDb = -std::numeric_limits<double>::infinity();
    } else if (residual <= 0) {
        out.snrLinear = std::numeric_limits<double>::infinity();
        out.snrDb = std::numeric_limits<double>::infinity();
    } else {
        out.snrLinear = signal / residual;
        out.snrDb = 10.0 * std::log10(out.snrLinear);
    }
    return out;
}

EvalReport evaluate(DisparityField const& dHat, DisparityField const& dRound,
                    DisparityField const& gt, double inlierThreshold) {

    MaskBuffer mask = inlierMask(dRound, gt, inlierThreshold);

    EvalReport rep;
    for (std::size_t i = 0; i < mask.size(); i++) {
        rep.nInliers += mask.flat(i) != 0 ? 1 : 0;
    }
    if (rep.nInliers == 0) {
        throw std::domain_error("evaluate: no inliers");
    }

    rep.mdPx = md(dHat, gt, mask);
    if (dHat.dims() == 1) {
        rep.maePx = mae(dHat, gt, mask);
        SnrResult snr = snrPixelLocking(dHat, dRound, gt, mask);
        rep.snrLinear = snr.snrLinear;
        rep.snrDb = snr.snrDb;
        rep.binTable = std::move(snr.bins);
    } else {
        rep.maePx = rep.mdPx;
    }
    return rep;
}

} // namespace subpix
