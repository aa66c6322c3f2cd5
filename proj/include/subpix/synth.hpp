#ifndef SUBPIX_SYNTH_HPP
#define SUBPIX_SYNTH_HPP

#include "refine1d.hpp"
#include "refine_nd.hpp"

#include <cstdint>
#include <vector>

namespace subpix {

struct SyntheticPair {
    NdBufferF source;
    NdBufferF target;
    std::vector<double> shift; // px, target content displaced by +shift
    double noiseSigma = 0;
};

/// Source is the base resampled at p + shift (linear along columns for 1D
/// shifts, bilinear for 2D); target keeps the base samples plus i.i.d.
/// Gaussian noise. Warp margins are cropped identically from both images,
/// and the true disparity from source to target is +shift everywhere.
SyntheticPair makeShiftedPair(NdBufferF const& base, std::vector<double> const& shift,
                              double noiseSigma = 0, std::uint64_t seed = 0);

/// Band-limited random texture in [0, 1]: seeded sum of low-frequency
/// sinusoids, byte-reproducible across runs.
NdBufferF proceduralTexture(int rows, int cols, std::uint64_t seed);

/// Exhaustive minimizer of the interpolated interval cost over the step grid
/// on [0, 1]; ties resolved toward smaller delta.
double gridOracle1d(IntervalFeatures const& f, CostKind costfn, double step);

struct OracleNd {
    Eigen::VectorXd beta;
    Eigen::VectorXd dHat;
    double cost = 0;
};

/// Exhaustive minimizer over convex barycentric weights (simplex grid).
/// Sweeps at the requested step (4-target sets start with a coarse pass),
/// then zooms locally to a 16x finer pitch; sound for convex costs.
OracleNd gridOracleNd(Eigen::VectorXd const& fs, TargetSet const& ts, CostKind costfn,
                      double step = 1e-3);

} // namespace subpix

#endif
