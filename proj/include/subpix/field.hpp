#ifndef SUBPIX_FIELD_HPP
#define SUBPIX_FIELD_HPP

#include "ndbuffer.hpp"

namespace subpix {

/// Per-pixel disparity/flow vectors (rows x cols x n) with a validity mask.
struct DisparityField {
    NdBufferF values; // rows x cols x n
    MaskBuffer valid; // rows x cols

    int rows() const { return values.rank() > 0 ? values.shape()[0] : 0; }
    int cols() const { return values.rank() > 1 ? values.shape()[1] : 0; }
    int dims() const { return values.rank() > 2 ? values.shape()[2] : 1; }

    float* vec(int r, int c) { return &values(r, c, 0); }
    float const* vec(int r, int c) const { return &values(r, c, 0); }

    static DisparityField make(int rows, int cols, int n) {
        DisparityField f;
        f.values = NdBufferF({rows, cols, n}, 0.f);
        f.valid = MaskBuffer({rows, cols}, 0);
        return f;
    }
};

} // namespace subpix

#endif
