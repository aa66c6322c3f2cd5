#ifndef SUBPIX_PATCHING_HPP
#define SUBPIX_PATCHING_HPP

#include "ndbuffer.hpp"

#include <vector>

namespace subpix {

enum class BorderMode { Constant, Clamp, Reject };

struct BorderPolicy {
    BorderMode mode = BorderMode::Clamp;
    float value = 0.f;

    static BorderPolicy clamp() { return {BorderMode::Clamp, 0.f}; }
    static BorderPolicy constant(float v) { return {BorderMode::Constant, v}; }
    static BorderPolicy reject() { return {BorderMode::Reject, 0.f}; }
};

/// Window of per-feature-channel offsets. Each offset vector has
/// spatialRank relative entries, optionally followed by one absolute
/// channel index when the source image carries a channel dimension.
struct PatchWindow {
    std::vector<std::vector<int>> offsets;
    int spatialRank = 0;

    int nFeatures() const { return static_cast<int>(offsets.size()); }
};

/// Centered side x side square window over `channels` image channels,
/// enumerated row-major with the channel index innermost.
PatchWindow makeSquareWindow(int side, int channels = 1);

/// Gather window samples into a trailing feature dimension.
/// Output shape: input spatial dims (minus margins under Reject) + features.
NdBufferF patch(NdBufferF const& input, PatchWindow const& window, BorderPolicy const& border);

} // namespace subpix

#endif
