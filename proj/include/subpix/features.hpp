#ifndef SUBPIX_FEATURES_HPP
#define SUBPIX_FEATURES_HPP

#include "ndbuffer.hpp"
#include "patching.hpp"

#include <array>

namespace subpix {

enum class Whitening { Raw, ZeroMean, Normalized, ZeroMeanNormalized };

/// Per-pixel feature vectors (rows x cols x channels). Pixels whose vector
/// became degenerate during whitening are flagged invalid.
struct FeatureVolume {
    NdBufferF data;
    MaskBuffer valid; // rows x cols
    Whitening whitening = Whitening::Raw;
    PatchWindow window;

    int rows() const { return data.dim(0); }
    int cols() const { return data.dim(1); }
    int channels() const { return data.dim(2); }

    float const* vec(int r, int c) const {
        return data.data() + data.offset(std::array<int, 3>{r, c, 0});
    }
};

/// Degeneracy threshold for whitening (64-bit norm after mean removal).
inline constexpr double kDegenerateNorm = 1e-12;

FeatureVolume buildFeatureVolume(NdBufferF const& image, PatchWindow const& window,
                                 BorderPolicy const& border);

/// Apply ZF / NF / ZNF to a raw volume. Mode Raw is a no-op copy.
FeatureVolume whiten(FeatureVolume const& fv, Whitening mode);

} // namespace subpix

#endif
