#ifndef SUBPIX_EVAL_HPP
#define SUBPIX_EVAL_HPP

#include "field.hpp"

#include <vector>

namespace subpix {

inline constexpr int kSnrBins = 40;

/// Inlier iff both fields are valid at the pixel and
/// ||d_round - gt||_inf < threshold.
MaskBuffer inlierMask(DisparityField const& dRound, DisparityField const& gt,
                      double threshold = 1.0);

/// Mean absolute error over the mask (1D fields).
double mae(DisparityField const& dHat, DisparityField const& gt, MaskBuffer const& mask);

/// Mean L2 norm of the difference over the mask (n-D fields).
double md(DisparityField const& dHat, DisparityField const& gt, MaskBuffer const& mask);

/// Root-mean-square error over the mask (1D fields).
double rmse(DisparityField const& dHat, DisparityField const& gt, MaskBuffer const& mask);

struct SnrBin {
    double lo = 0;
    double hi = 0;
    double meanError = 0;
    long long count = 0;
};

struct SnrResult {
    double snrLinear = 0;
    double snrDb = 0; // -inf when the predictable signal vanishes
    std::vector<SnrBin> bins;
};

/// Pixel-locking SNR: error power predictable from the fractional part of
/// the true disparity (relative to the discrete match), over residual power.
SnrResult snrPixelLocking(DisparityField const& dHat, DisparityField const& dRound,
                          DisparityField const& gt, MaskBuffer const& mask);

struct EvalReport {
    double maePx = 0;
    double mdPx = 0;
    double snrLinear = 0;
    double snrDb = 0;
    std::vector<SnrBin> binTable;
    long long nInliers = 0;
};

/// Full report against ground truth; SNR only computed for 1D fields.
EvalReport evaluate(DisparityField const& dHat, DisparityField const& dRound,
                    DisparityField const& gt, double inlierThreshold = 1.0);

} // namespace subpix

#endif
