#ifndef SUBPIX_REFINE_ND_HPP
#define SUBPIX_REFINE_ND_HPP

#include "features.hpp"
#include "refine1d.hpp"

#include <Eigen/Dense>

#include <vector>

namespace subpix {

enum class CostRefineMethod { Parabola, Equiangular };

/// Cost values on the {-r..r}^n grid around the discrete optimum,
/// minimization convention.
struct CostNeighborhood {
    NdBufferD values;
    MaskBuffer valid;
    int radius = 1;

    int dims() const { return values.rank(); }

    double at(std::span<const int> offset) const;
    bool validAt(std::span<const int> offset) const;

    static CostNeighborhood make(int ndims, int radius);
    double& ref(std::span<const int> offset);
    std::uint8_t& validRef(std::span<const int> offset);
};

/// Per-dimension 1D refinement on the axis-aligned triplets.
/// Degenerate or invalid axes yield a zero component.
Eigen::VectorXd separableRefine(CostNeighborhood const& nbh, CostRefineMethod method,
                                std::vector<RefineStatus>* statuses = nullptr);

/// Line-intersection refinement (radius-2 neighborhood required).
/// Falls back to separableRefine when the construction degenerates.
Eigen::Vector2d anisotropicRefine2d(CostNeighborhood const& nbh, CostRefineMethod method,
                                    RefineStatus* status = nullptr);

/// Least-squares paraboloid over the 3x3 neighborhood; falls back to
/// separable refinement unless the quadratic form is positive definite.
Eigen::Vector2d paraboloidRefine2d(CostNeighborhood const& nbh, RefineStatus* status = nullptr);

/// Target feature vectors (columns; designated base vector last) with their
/// integer disparity coordinates.
struct TargetSet {
    Eigen::MatrixXd targets; // featureDim x n
    Eigen::MatrixXd D;       // disparityDim x n

    int nTargets() const { return static_cast<int>(targets.cols()); }
};

enum class Contiguity { Rook, Queen };
enum class NdStrategy { Split, Symmetric };

/// One vertex set: relative integer disparity offsets, center (0,...,0) last.
struct CornerSet {
    std::vector<std::vector<int>> offsets;
};

/// Enumerate the vertex sets around the discrete optimum.
/// Split yields one set per quadrant; symmetric yields a single relaxed set.
std::vector<CornerSet> cornerSets(int ndims, Contiguity contiguity, NdStrategy strategy);

struct BarycentricSolution {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    Eigen::VectorXd dHat;
    RefineStatus status = RefineStatus::Ok;
    int iterations = 0;
    bool costMonotone = true;
};

/// Geometric NCC solution: intersect the direction of the projected source
/// vector with the affine span of the targets.
BarycentricSolution nccBarycentricRefine(Eigen::VectorXd const& fs, TargetSet const& ts);

/// Least-squares projection onto the affine span of the targets.
BarycentricSolution ssdBarycentricRefine(Eigen::VectorXd const& fs, TargetSet const& ts);

/// Exact L1 solution via projected-gradient descent with weighted-median
/// line searches, following the inflexion hyperplanes of the cost.
BarycentricSolution sadBarycentricRefine(Eigen::VectorXd const& fs, TargetSet const& ts,
                                         int maxIter = 64);

/// Dispatch on the cost family.
BarycentricSolution refineNdForCost(Eigen::VectorXd const& fs, TargetSet const& ts,
                                    CostKind costfn, int sadMaxIter = 64);

struct RefinementResult {
    Eigen::VectorXd delta;
    RefineStatus status = RefineStatus::Ok;
};

/// Full feature-space N-D refinement around the discrete disparity dRound.
/// Targets are read from Ft at pixel + dRound + offset.
RefinementResult featureRefineNd(Eigen::VectorXd const& fs, FeatureVolume const& Ft,
                                 int row, int col, std::span<const int> dRound,
                                 CostKind costfn, Contiguity contiguity, NdStrategy strategy);

/// Minimization-convention cost of fs against an interpolated target A*beta.
double barycentricCostAt(Eigen::VectorXd const& fs, TargetSet const& ts,
                         Eigen::VectorXd const& beta, CostKind costfn);

} // namespace subpix

#endif
