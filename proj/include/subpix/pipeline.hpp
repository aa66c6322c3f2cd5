#ifndef SUBPIX_PIPELINE_HPP
#define SUBPIX_PIPELINE_HPP

#include "cost.hpp"
#include "eval.hpp"
#include "field.hpp"
#include "refine1d.hpp"
#include "refine_nd.hpp"

#include <optional>
#include <string_view>

namespace subpix {

enum class Method {
    Raw,
    Parabola,
    Equiangular,
    Shimizu2005,
    BarycentricSplit,
    PredictiveSymmetric,
    SeparableParabola,
    SeparableEquiangular,
    AnisotropicParabola,
    AnisotropicEquiangular,
    Paraboloid,
    RookSplit,
    QueenSplit,
    RookSymmetric,
    QueenSymmetric,
};

char const* methodName(Method m);
std::optional<Method> parseMethod(std::string_view name);

/// Whether the method applies to the given search dimensionality.
bool methodSupportsDims(Method m, int dims);

struct MatchConfig {
    CostKind costfn = CostKind::ZNCC;
    int windowSide = 5;
    SearchRange range;
    Method method = Method::Raw;
    bool interpolateAfterWhitening = false;
    BorderPolicy border = BorderPolicy::clamp();
    int sadMaxIter = 64;
};

struct MatchOutput {
    DisparityField refined;
    DisparityField discrete;
    MaskBuffer status; // rows x cols, RefineStatus codes
};

/// Full pipeline: features -> cost volume -> discrete match -> refinement.
MatchOutput matchAndRefine(NdBufferF const& source, NdBufferF const& target,
                           MatchConfig const& config);

namespace reference {

/// Serial driver over the same per-pixel kernel, kept as parallel oracle.
MatchOutput matchAndRefineSerial(NdBufferF const& source, NdBufferF const& target,
                                 MatchConfig const& config);

} // namespace reference

} // namespace subpix

#endif
