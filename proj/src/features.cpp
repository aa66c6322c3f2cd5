#include "subpix/features.hpp"

#include <cmath>
#include <stdexcept>

namespace subpix {

FeatureVolume buildFeatureVolume(NdBufferF const& image, PatchWindow const& window,
                                 BorderPolicy const& border) {

    if (image.rank() != 2 && image.rank() != 3) {
        throw std::invalid_argument("buildFeatureVolume: image must be rank 2 or 3");
    }

    FeatureVolume fv;
    fv.data = patch(image, window, border);
    fv.valid = MaskBuffer({fv.data.dim(0), fv.data.dim(1)}, 1);
    fv.whitening = Whitening::Raw;
    fv.window = window;
    return fv;
}

FeatureVolume whiten(FeatureVolume const& fv, Whitening mode) {

    if (mode == Whitening::Raw) {
        return fv;
    }
    if (fv.whitening != Whitening::Raw) {
        throw std::logic_error("whiten: volume already whitened");
    }

    FeatureVolume out = fv;
    out.whitening = mode;

    int rows = fv.rows();
    int cols = fv.cols();
    int nc = fv.channels();

    bool zeroMean = (mode == Whitening::ZeroMean || mode == Whitening::ZeroMeanNormalized);
    bool normalize = (mode == Whitening::Normalized || mode == Whitening::ZeroMeanNormalized);

    #pragma omp parallel for
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {

            float* v = out.data.data() +
                       out.data.offset(std::array<int, 3>{r, c, 0});

            if (zeroMean) {
                double mean = 0;
                for (int k = 0; k < nc; k++) {
                    mean += v[k];
                }
                mean /= nc;
                for (int k = 0; k < nc; k++) {
                    v[k] = static_cast<float>(v[k] - mean);
                }
            }

            if (normalize) {
                double n2 = 0;
                for (int k = 0; k < nc; k++) {
                    n2 += static_cast<double>(v[k]) * static_cast<double>(v[k]);
                }
                double n = std::sqrt(n2);
                if (n < kDegenerateNorm) {
                    out.valid(r, c) = 0;
                } else {
                    for (int k = 0; k < nc; k++) {
                        v[k] = static_cast<float>(v[k] / n);
                    }
                }
            }
        }
    }

    return out;
}

} // namespace subpix
