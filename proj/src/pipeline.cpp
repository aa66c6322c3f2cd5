#include "subpix/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace subpix {

char const* methodName(Method m) {
    switch (m) {
    case Method::Raw:
        return "raw";
    case Method::Parabola:
        return "parabola";
    case Method::Equiangular:
        return "equiangular";
    case Method::Shimizu2005:
        return "shimizu2005";
    case Method::BarycentricSplit:
        return "barycentric-split";
    case Method::PredictiveSymmetric:
        return "predictive-symmetric";
    case Method::SeparableParabola:
        return "separable-parabola";
    case Method::SeparableEquiangular:
        return "separable-equiangular";
    case Method::AnisotropicParabola:
        return "anisotropic-parabola";
    case Method::AnisotropicEquiangular:
        return "anisotropic-equiangular";
    case Method::Paraboloid:
        return "paraboloid";
    case Method::RookSplit:
        return "rook-split";
    case Method::QueenSplit:
        return "queen-split";
    case Method::RookSymmetric:
        return "rook-symmetric";
    case Method::QueenSymmetric:
        return "queen-symmetric";
    }
    return "?";
}

std::optional<Method> parseMethod(std::string_view name) {
    for (Method m : {Method::Raw, Method::Parabola, Method::Equiangular, Method::Shimizu2005,
                     Method::BarycentricSplit, Method::PredictiveSymmetric,
                     Method::SeparableParabola, Method::SeparableEquiangular,
                     Method::AnisotropicParabola, Method::AnisotropicEquiangular,
                     Method::Paraboloid, Method::RookSplit, Method::QueenSplit,
                     Method::RookSymmetric, Method::QueenSymmetric}) {
        if (name == methodName(m)) {
            return m;
        }
    }
    return std::nullopt;
}

bool methodSupportsDims(Method m, int dims) {
    switch (m) {
    case Method::Raw:
        return dims >= 1;
    case Method::Parabola:
    case Method::Equiangular:
    case Method::Shimizu2005:
    case Method::BarycentricSplit:
    case Method::PredictiveSymmetric:
        return dims == 1;
    case Method::SeparableParabola:
    case Method::SeparableEquiangular:
        return dims >= 2;
    case Method::AnisotropicParabola:
    case Method::AnisotropicEquiangular:
    case Method::Paraboloid:
        return dims == 2;
    case Method::RookSplit:
    case Method::QueenSplit:
    case Method::RookSymmetric:
    case Method::QueenSymmetric:
        return dims >= 1;
    }
    return false;
}

namespace {

bool usesFeatureRefinement(Method m) {
    switch (m) {
    case Method::BarycentricSplit:
    case Method::PredictiveSymmetric:
    case Method::RookSplit:
    case Method::QueenSplit:
    case Method::RookSymmetric:
    case Method::QueenSymmetric:
        return true;
    default:
        return false;
    }
}

int neighborhoodRadius(Method m) {
    return m == Method::AnisotropicParabola || m == Method::AnisotropicEquiangular ? 2 : 1;
}

struct PipelineState {
    MatchConfig const* config = nullptr;
    NdBufferF const* source = nullptr;
    NdBufferF const* target = nullptr;
    PatchWindow window;
    FeatureVolume FsRef;
    FeatureVolume FtRef;
    CostVolume cv;
    bool featureRef = false;
};

// minimization-convention cost at cell d, or invalid
bool costAtCell(CostVolume const& cv, int r, int c, std::span<const int> d, double& out) {
    int n = cv.range.dims();
    for (int i = 0; i < n; i++) {
        if (d[static_cast<std::size_t>(i)] < cv.range.bounds[static_cast<std::size_t>(i)][0] ||
            d[static_cast<std::size_t>(i)] > cv.range.bounds[static_cast<std::size_t>(i)][1]) {
            return false;
        }
    }
    std::vector<int> idx{r, c};
    for (int i = 0; i < n; i++) {
        idx.push_back(d[static_cast<std::size_t>(i)] -
                      cv.range.bounds[static_cast<std::size_t>(i)][0]);
    }
    if (cv.valid.at(idx) == 0) {
        return false;
    }
    double v = cv.data.at(idx);
    out = maximizes(cv.costfn) ? -v : v;
    return true;
}

Eigen::VectorXd featureVec(FeatureVolume const& fv, int r, int c) {
    Eigen::VectorXd v(fv.channels());
    float const* p = fv.vec(r, c);
    for (int k = 0; k < fv.channels(); k++) {
        v[k] = p[k];
    }
    return v;
}

RefineStatus worstStatus(std::vector<RefineStatus> const& statuses) {
    RefineStatus worst = RefineStatus::Ok;
    for (RefineStatus s : statuses) {
        worst = std::max(worst, s, [](RefineStatus a, RefineStatus b) {
            return static_cast<int>(a) < static_cast<int>(b);
        });
    }
    return worst;
}

void refinePixel(PipelineState const& st, int r, int c, MatchOutput& out) {

    MatchConfig const& cfg = *st.config;
    int n = cfg.range.dims();

    DiscreteDisparity best = discreteBest(st.cv, r, c);
    out.status(r, c) = static_cast<std::uint8_t>(RefineStatus::NotRefinable);
    if (!best.valid) {
        return;
    }

    out.discrete.valid(r, c) = 1;
    out.refined.valid(r, c) = 1;
    for (int i = 0; i < n; i++) {
        out.discrete.vec(r, c)[i] = static_cast<float>(best.d[static_cast<std::size_t>(i)]);
        out.refined.vec(r, c)[i] = static_cast<float>(best.d[static_cast<std::size_t>(i)]);
    }

    std::vector<double> delta(static_cast<std::size_t>(n), 0.0);
    RefineStatus status = RefineStatus::Ok;

    switch (cfg.method) {

    case Method::Raw:
        break;

    case Method::Parabola:
    case Method::Equiangular: {
        int dm[1] = {best.d[0] - 1};
        int dp[1] = {best.d[0] + 1};
        CostTriplet t;
        if (!costAtCell(st.cv, r, c, std::span<const int>(dm, 1), t.cMinus) ||
            !costAtCell(st.cv, r, c, std::span<const int>(best.d.data(), 1), t.c0) ||
            !costAtCell(st.cv, r, c, std::span<const int>(dp, 1), t.cPlus)) {
            status = RefineStatus::NotRefinable;
            break;
        }
        SubpixelResult res = cfg.method == Method::Parabola ? parabolaRefine(t)
                                                            : equiangularRefine(t);
        delta[0] = res.delta;
        status = res.status;
        break;
    }

    case Method::Shimizu2005: {
        SubpixelResult res =
            shimizuRefine1d(*st.source, *st.target, st.window, cfg.costfn, r, c, best.d[0]);
        delta[0] = res.delta;
        status = res.status;
        break;
    }

    case Method::BarycentricSplit:
    case Method::PredictiveSymmetric: {
        int tc = c + best.d[0];
        if (st.FsRef.valid(r, c) == 0 || tc - 1 < 0 || tc + 1 >= st.FtRef.cols() ||
            st.FtRef.valid(r, tc - 1) == 0 || st.FtRef.valid(r, tc) == 0 ||
            st.FtRef.valid(r, tc + 1) == 0) {
            status = RefineStatus::NotRefinable;
            break;
        }
        SubpixelResult res = refineIntervalPair(
            featureVec(st.FsRef, r, c), featureVec(st.FtRef, r, tc - 1),
            featureVec(st.FtRef, r, tc), featureVec(st.FtRef, r, tc + 1), cfg.costfn,
            cfg.method == Method::BarycentricSplit ? PairStrategy::SplitBarycentric
                                                   : PairStrategy::SymmetricPredictive);
        delta[0] = res.delta;
        status = res.status;
        break;
    }

    case Method::SeparableParabola:
    case Method::SeparableEquiangular:
    case Method::AnisotropicParabola:
    case Method::AnisotropicEquiangular:
    case Method::Paraboloid: {
        int radius = neighborhoodRadius(cfg.method);
        CostNeighborhood nbh = CostNeighborhood::make(n, radius);
        std::vector<int> off(static_cast<std::size_t>(n), -radius);
        std::vector<int> d(static_cast<std::size_t>(n), 0);
        bool done = false;
        while (!done) {
            for (int i = 0; i < n; i++) {
                d[static_cast<std::size_t>(i)] =
                    best.d[static_cast<std::size_t>(i)] + off[static_cast<std::size_t>(i)];
            }
            double v = 0;
            if (costAtCell(st.cv, r, c, d, v)) {
                nbh.ref(off) = v;
                nbh.validRef(off) = 1;
            }
            int i = n - 1;
            while (i >= 0 && ++off[static_cast<std::size_t>(i)] > radius) {
                off[static_cast<std::size_t>(i)] = -radius;
                i--;
            }
            done = i < 0;
        }

        CostRefineMethod crm = cfg.method == Method::SeparableEquiangular ||
                                       cfg.method == Method::AnisotropicEquiangular
                                   ? CostRefineMethod::Equiangular
                                   : CostRefineMethod::Parabola;

        if (cfg.method == Method::SeparableParabola ||
            cfg.method == Method::SeparableEquiangular) {
            std::vector<RefineStatus> statuses;
            Eigen::VectorXd dv = separableRefine(nbh, crm, &statuses);
            for (int i = 0; i < n; i++) {
                delta[static_cast<std::size_t>(i)] = dv[i];
            }
            status = worstStatus(statuses);
        } else if (cfg.method == Method::Paraboloid) {
            Eigen::Vector2d dv = paraboloidRefine2d(nbh, &status);
            delta[0] = dv[0];
            delta[1] = dv[1];
        } else {
            Eigen::Vector2d dv = anisotropicRefine2d(nbh, crm, &status);
            delta[0] = dv[0];
            delta[1] = dv[1];
        }
        break;
    }

    case Method::RookSplit:
    case Method::QueenSplit:
    case Method::RookSymmetric:
    case Method::QueenSymmetric: {
        if (st.FsRef.valid(r, c) == 0) {
            status = RefineStatus::NotRefinable;
            break;
        }
        Contiguity contiguity =
            cfg.method == Method::RookSplit || cfg.method == Method::RookSymmetric
                ? Contiguity::Rook
                : Contiguity::Queen;
        NdStrategy strategy =
            cfg.method == Method::RookSplit || cfg.method == Method::QueenSplit
                ? NdStrategy::Split
                : NdStrategy::Symmetric;
        RefinementResult res = featureRefineNd(featureVec(st.FsRef, r, c), st.FtRef, r, c,
                                               best.d, cfg.costfn, contiguity, strategy);
        for (int i = 0; i < n; i++) {
            delta[static_cast<std::size_t>(i)] = res.delta[i];
        }
        status = res.status;
        break;
    }
    }

    for (int i = 0; i < n; i++) {
        out.refined.vec(r, c)[i] =
            static_cast<float>(best.d[static_cast<std::size_t>(i)] +
                               delta[static_cast<std::size_t>(i)]);
    }
    out.status(r, c) = static_cast<std::uint8_t>(status);
}

PipelineState prepare(NdBufferF const& source, NdBufferF const& target,
                      MatchConfig const& config, bool serial) {

    if (!methodSupportsDims(config.method, config.range.dims())) {
        throw std::invalid_argument(std::string("method ") + methodName(config.method) +
                                    " does not support " +
                                    std::to_string(config.range.dims()) + "D search");
    }
    if (source.shape() != target.shape()) {
        throw std::invalid_argument("matchAndRefine: image shape mismatch");
    }

    PipelineState st;
    st.config = &config;
    st.source = &source;
    st.target = &target;

    int channels = source.rank() == 3 ? source.dim(2) : 1;
    st.window = makeSquareWindow(config.windowSide, channels);

    FeatureVolume FsRaw = buildFeatureVolume(source, st.window, config.border);
    FeatureVolume FtRaw = buildFeatureVolume(target, st.window, config.border);

    Whitening matchW = matchingWhitening(config.costfn);
    FeatureVolume FsMatch = whiten(FsRaw, matchW);
    FeatureVolume FtMatch = whiten(FtRaw, matchW);

    st.cv = serial ? reference::buildCostVolumeSerial(FsMatch, FtMatch, config.range, config.costfn)
                   : buildCostVolume(FsMatch, FtMatch, config.range, config.costfn);

    st.featureRef = usesFeatureRefinement(config.method);
    if (st.featureRef) {
        Whitening refW = refinementWhitening(config.costfn, config.interpolateAfterWhitening);
        st.FsRef = refW == matchW ? std::move(FsMatch) : whiten(FsRaw, refW);
        st.FtRef = refW == matchW ? std::move(FtMatch) : whiten(FtRaw, refW);
    }
    return st;
}

MatchOutput emptyOutput(CostVolume const& cv, int n) {
    MatchOutput out;
    out.refined = DisparityField::make(cv.rows(), cv.cols(), n);
    out.discrete = DisparityField::make(cv.rows(), cv.cols(), n);
    out.status = MaskBuffer({cv.rows(), cv.cols()},
                            static_cast<std::uint8_t>(RefineStatus::NotRefinable));
    return out;
}

} // namespace

MatchOutput matchAndRefine(NdBufferF const& source, NdBufferF const& target,
                           MatchConfig const& config) {

    PipelineState st = prepare(source, target, config, false);
    MatchOutput out = emptyOutput(st.cv, config.range.dims());

    int rows = st.cv.rows();
    int cols = st.cv.cols();

    #pragma omp parallel for schedule(dynamic, 4)
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            refinePixel(st, r, c, out);
        }
    }
    return out;
}

namespace reference {

MatchOutput matchAndRefineSerial(NdBufferF const& source, NdBufferF const& target,
                                 MatchConfig const& config) {

    PipelineState st = prepare(source, target, config, true);
    MatchOutput out = emptyOutput(st.cv, config.range.dims());

    for (int r = 0; r < st.cv.rows(); r++) {
        for (int c = 0; c < st.cv.cols(); c++) {
            refinePixel(st, r, c, out);
        }
    }
    return out;
}

} // namespace reference

} // namespace subpix
