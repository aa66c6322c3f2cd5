#include "subpix/patching.hpp"

#include <algorithm>
#include <stdexcept>

namespace subpix {

PatchWindow makeSquareWindow(int side, int channels) {

    if (side < 1 || side % 2 == 0) {
        throw std::invalid_argument("makeSquareWindow: side must be odd and >= 1");
    }
    if (channels < 1) {
        throw std::invalid_argument("makeSquareWindow: channels must be >= 1");
    }

    PatchWindow w;
    w.spatialRank = 2;
    int h = side / 2;

    w.offsets.reserve(static_cast<std::size_t>(side) * static_cast<std::size_t>(side) *
                      static_cast<std::size_t>(channels));

    for (int dy = -h; dy <= h; dy++) {
        for (int dx = -h; dx <= h; dx++) {
            for (int c = 0; c < channels; c++) {
                if (channels == 1) {
                    w.offsets.push_back({dy, dx});
                } else {
                    w.offsets.push_back({dy, dx, c});
                }
            }
        }
    }

    return w;
}

NdBufferF patch(NdBufferF const& input, PatchWindow const& window, BorderPolicy const& border) {

    int l = window.spatialRank;

    if (window.offsets.empty()) {
        throw std::invalid_argument("patch: empty window");
    }
    if (l < 1 || (input.rank() != l && input.rank() != l + 1)) {
        throw std::invalid_argument("patch: window rank incompatible with input rank");
    }

    bool hasChannelDim = (input.rank() == l + 1);
    std::size_t offLen = static_cast<std::size_t>(l) + (hasChannelDim ? 1 : 0);

    for (auto const& off : window.offsets) {
        if (off.size() != offLen) {
            throw std::invalid_argument("patch: offset length incompatible with input rank");
        }
        if (hasChannelDim && (off.back() < 0 || off.back() >= input.dim(l))) {
            throw std::invalid_argument("patch: channel index out of range");
        }
    }

    // margins per spatial dim
    std::vector<int> marginLo(static_cast<std::size_t>(l), 0);
    std::vector<int> marginHi(static_cast<std::size_t>(l), 0);
    for (auto const& off : window.offsets) {
        for (int i = 0; i < l; i++) {
            marginLo[static_cast<std::size_t>(i)] =
                std::max(marginLo[static_cast<std::size_t>(i)], -off[static_cast<std::size_t>(i)]);
            marginHi[static_cast<std::size_t>(i)] =
                std::max(marginHi[static_cast<std::size_t>(i)], off[static_cast<std::size_t>(i)]);
        }
    }

    std::vector<int> outShape;
    for (int i = 0; i < l; i++) {
        int s = input.dim(i);
        if (border.mode == BorderMode::Reject) {
            s -= marginLo[static_cast<std::size_t>(i)] + marginHi[static_cast<std::size_t>(i)];
            if (s <= 0) {
                throw std::invalid_argument("patch: window larger than image under reject border");
            }
        }
        outShape.push_back(s);
    }
    int nf = window.nFeatures();
    outShape.push_back(nf);

    NdBufferF out(outShape);

    std::vector<int> pos(static_cast<std::size_t>(l), 0);
    std::vector<int> src(static_cast<std::size_t>(input.rank()), 0);

    std::size_t nSpatial = out.size() / static_cast<std::size_t>(nf);

    for (std::size_t flat = 0; flat < nSpatial; flat++) {

        std::size_t rem = flat;
        for (int i = l - 1; i >= 0; i--) {
            pos[static_cast<std::size_t>(i)] =
                static_cast<int>(rem % static_cast<std::size_t>(outShape[static_cast<std::size_t>(i)]));
            rem /= static_cast<std::size_t>(outShape[static_cast<std::size_t>(i)]);
        }

        for (int c = 0; c < nf; c++) {
            auto const& off = window.offsets[static_cast<std::size_t>(c)];

            bool inside = true;
            for (int i = 0; i < l; i++) {
                int q = pos[static_cast<std::size_t>(i)] + off[static_cast<std::size_t>(i)];
                if (border.mode == BorderMode::Reject) {
                    q += marginLo[static_cast<std::size_t>(i)];
                }
                if (q < 0 || q >= input.dim(i)) {
                    if (border.mode == BorderMode::Clamp) {
                        q = std::clamp(q, 0, input.dim(i) - 1);
                    } else {
                        inside = false;
                        break;
                    }
                }
                src[static_cast<std::size_t>(i)] = q;
            }

            float v;
            if (!inside) {
                v = border.value; // Constant mode; Reject never lands here
            } else {
                if (hasChannelDim) {
                    src[static_cast<std::size_t>(l)] = off.back();
                }
                v = input.at(src);
            }
            out.flat(flat * static_cast<std::size_t>(nf) + static_cast<std::size_t>(c)) = v;
        }
    }

    return out;
}

} // namespace subpix
