#ifndef SUBPIX_REFINE1D_HPP
#define SUBPIX_REFINE1D_HPP

#include "cost.hpp"
#include "ndbuffer.hpp"
#include "patching.hpp"

#include <Eigen/Dense>

#include <span>

namespace subpix {

enum class RefineStatus : std::uint8_t {
    Ok = 0,
    Clamped = 1,
    DegenerateFallback = 2,
    NotConverged = 3,
    NotRefinable = 4,
};

/// Denominator threshold below which closed forms fall back.
inline constexpr double kDegenerateDenom = 1e-12;

/// Cost values at d-1, d, d+1 in minimization convention.
/// Similarity scores (NCC family) are negated before entry.
struct CostTriplet {
    double cMinus = 0;
    double c0 = 0;
    double cPlus = 0;
};

struct SubpixelResult {
    double delta = 0;
    RefineStatus status = RefineStatus::Ok;
    double costAtDelta = 0;
};

/// Parabola vertex through the triplet, clamped to [-0.5, 0.5].
SubpixelResult parabolaRefine(CostTriplet const& t);

/// Equiangular-lines (triangular) fit, clamped to [-0.5, 0.5].
SubpixelResult equiangularRefine(CostTriplet const& t);

/// Source vector plus the two target vectors bounding the disparity interval.
struct IntervalFeatures {
    Eigen::VectorXd fs;
    Eigen::VectorXd ftLo;
    Eigen::VectorXd ftHi;
};

/// Closed-form NCC maximizer over the linearly interpolated (then
/// normalized) target features, clamped to [0, 1].
SubpixelResult nccFeatureRefine1d(IntervalFeatures const& f);

/// Closed-form SSD minimizer: projection of fs onto the target segment.
SubpixelResult ssdFeatureRefine1d(IntervalFeatures const& f);

/// Lower weighted median: minimizer of sum_i w_i |x - v_i|.
double weightedMedian(std::span<const double> values, std::span<const double> weights);

/// Exact SAD minimizer over the interval via per-channel crossings and a
/// weighted median.
SubpixelResult sadFeatureRefine1d(IntervalFeatures const& f);

enum class PairStrategy { SplitBarycentric, SymmetricPredictive };

/// Refine over both neighbor intervals of the discrete optimum.
/// Split runs the 1D refiner per interval and keeps the lower-cost side;
/// symmetric solves the relaxed 3-target problem. Result in [-1, 1].
SubpixelResult refineIntervalPair(Eigen::VectorXd const& fs, Eigen::VectorXd const& ftLeft,
                                  Eigen::VectorXd const& ftCenter, Eigen::VectorXd const& ftRight,
                                  CostKind costfn, PairStrategy strategy);

/// Pixel-locking cancellation: averages the parabola estimate on the
/// original pair with the estimate on a half-pixel-interpolated target.
SubpixelResult shimizuRefine1d(NdBufferF const& source, NdBufferF const& target,
                               PatchWindow const& window, CostKind costfn,
                               int row, int col, int d);

/// Cost of the linearly interpolated interval at fractional position delta,
/// in minimization convention (NCC negated, normalized after interpolation).
double intervalCostAt(IntervalFeatures const& f, CostKind costfn, double delta);

} // namespace subpix

#endif
