#include "subpix/refine_nd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace subpix {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kLineDetTolerance = 1e-9;
constexpr double kDescentTolerance = 1e-10;

std::vector<int> toIndex(std::span<const int> offset, int radius) {
    std::vector<int> idx(offset.size());
    for (std::size_t i = 0; i < offset.size(); i++) {
        idx[i] = offset[i] + radius;
    }
    return idx;
}

} // namespace

CostNeighborhood CostNeighborhood::make(int ndims, int radius) {
    CostNeighborhood nbh;
    nbh.radius = radius;
    std::vector<int> shape(static_cast<std::size_t>(ndims), 2 * radius + 1);
    nbh.values = NdBufferD(shape, 0.0);
    nbh.valid = MaskBuffer(shape, 0);
    return nbh;
}

double CostNeighborhood::at(std::span<const int> offset) const {
    return values.at(toIndex(offset, radius));
}

bool CostNeighborhood::validAt(std::span<const int> offset) const {
    auto idx = toIndex(offset, radius);
    if (!values.inBounds(idx)) {
        return false;
    }
    return valid.at(idx) != 0;
}

double& CostNeighborhood::ref(std::span<const int> offset) {
    return values.at(toIndex(offset, radius));
}

std::uint8_t& CostNeighborhood::validRef(std::span<const int> offset) {
    return valid.at(toIndex(offset, radius));
}

namespace {

SubpixelResult costRefine(CostTriplet const& t, CostRefineMethod method) {
    return method == CostRefineMethod::Parabola ? parabolaRefine(t) : equiangularRefine(t);
}

} // namespace

Eigen::VectorXd separableRefine(CostNeighborhood const& nbh, CostRefineMethod method,
                                std::vector<RefineStatus>* statuses) {

    int n = nbh.dims();
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    if (statuses) {
        statuses->assign(static_cast<std::size_t>(n), RefineStatus::Ok);
    }

    std::vector<int> off(static_cast<std::size_t>(n), 0);

    for (int i = 0; i < n; i++) {

        off.assign(static_cast<std::size_t>(n), 0);

        off[static_cast<std::size_t>(i)] = -1;
        bool okMinus = nbh.validAt(off);
        double cm = okMinus ? nbh.at(off) : 0;

        off[static_cast<std::size_t>(i)] = 0;
        bool okCenter = nbh.validAt(off);
        double c0 = okCenter ? nbh.at(off) : 0;

        off[static_cast<std::size_t>(i)] = 1;
        bool okPlus = nbh.validAt(off);
        double cp = okPlus ? nbh.at(off) : 0;

        if (!okMinus || !okCenter || !okPlus) {
            if (statuses) {
                (*statuses)[static_cast<std::size_t>(i)] = RefineStatus::Clamped;
            }
            continue;
        }

        SubpixelResult r = costRefine({cm, c0, cp}, method);
        delta[i] = r.delta;
        if (statuses) {
            (*statuses)[static_cast<std::size_t>(i)] = r.status;
        }
    }

    return delta;
}

namespace {

// 1D correction along dimension `dim` in the row of the orthogonal
// dimension fixed at `other`; the discrete minimum is located within
// {-1, 0, 1} first. Returns false if required cells are missing.
bool rowCorrection(CostNeighborhood const& nbh, CostRefineMethod method, int dim, int other,
                   double& out) {

    int o = 1 - dim;

    auto cell = [&](int t, bool& ok) {
        int off[2];
        off[dim] = t;
        off[o] = other;
        ok = ok && nbh.validAt(std::span<const int>(off, 2));
        return ok ? nbh.at(std::span<const int>(off, 2)) : 0.0;
    };

    bool ok = true;
    double c[3];
    for (int t = -1; t <= 1; t++) {
        c[t + 1] = cell(t, ok);
    }
    if (!ok) {
        return false;
    }

    int tMin = 0;
    for (int t = -1; t <= 1; t++) {
        if (c[t + 1] < c[tMin + 1]) {
            tMin = t;
        }
    }

    bool okT = true;
    double cm = cell(tMin - 1, okT);
    double cp = cell(tMin + 1, okT);
    if (!okT) {
        return false;
    }

    SubpixelResult r = costRefine({cm, c[tMin + 1], cp}, method);
    if (r.status == RefineStatus::DegenerateFallback) {
        return false;
    }
    out = tMin + r.delta;
    return true;
}

} // namespace

Eigen::Vector2d anisotropicRefine2d(CostNeighborhood const& nbh, CostRefineMethod method,
                                    RefineStatus* status) {

    if (nbh.dims() != 2 || nbh.radius != 2) {
        throw std::invalid_argument("anisotropicRefine2d: radius-2 2D neighborhood required");
    }

    auto fallback = [&]() {
        if (status) {
            *status = RefineStatus::DegenerateFallback;
        }
        Eigen::VectorXd d = separableRefine(nbh, method);
        return Eigen::Vector2d(d[0], d[1]);
    };

    // corrections s_i(j) along dim i at offsets j of the other dim,
    // least-squares line fit s_i(j) = a_i + b_i * j
    double a[2], b[2];
    for (int dim = 0; dim < 2; dim++) {
        double s[3];
        for (int j = -1; j <= 1; j++) {
            if (!rowCorrection(nbh, method, dim, j, s[j + 1])) {
                return fallback();
            }
        }
        a[dim] = (s[0] + s[1] + s[2]) / 3.0;
        b[dim] = (s[2] - s[0]) / 2.0;
    }

    double det = 1.0 - b[0] * b[1];
    if (std::abs(det) < kLineDetTolerance) {
        return fallback();
    }

    Eigen::Vector2d delta((a[0] + b[0] * a[1]) / det, (a[1] + b[1] * a[0]) / det);
    if (delta.lpNorm<Eigen::Infinity>() > 1.0) {
        return fallback();
    }

    if (status) {
        *status = RefineStatus::Ok;
    }
    return delta;
}

Eigen::Vector2d paraboloidRefine2d(CostNeighborhood const& nbh, RefineStatus* status) {

    if (nbh.dims() != 2 || nbh.radius < 1) {
        throw std::invalid_argument("paraboloidRefine2d: 2D neighborhood required");
    }

    auto fallback = [&]() {
        if (status) {
            *status = RefineStatus::DegenerateFallback;
        }
        Eigen::VectorXd d = separableRefine(nbh, CostRefineMethod::Parabola);
        return Eigen::Vector2d(d[0], d[1]);
    };

    Eigen::Matrix<double, 9, 6> A;
    Eigen::Matrix<double, 9, 1> rhs;
    int k = 0;
    for (int x = -1; x <= 1; x++) {
        for (int y = -1; y <= 1; y++) {
            int off[2] = {x, y};
            if (!nbh.validAt(std::span<const int>(off, 2))) {
                return fallback();
            }
            A.row(k) << x * x, y * y, x * y, x, y, 1.0;
            rhs[k] = nbh.at(std::span<const int>(off, 2));
            k++;
        }
    }

    Eigen::Matrix<double, 6, 1> q = A.colPivHouseholderQr().solve(rhs);
    double qa = q[0], qb = q[1], qc = q[2], qd = q[3], qe = q[4];

    double hdet = 4.0 * qa * qb - qc * qc;
    if (qa <= 0 || hdet <= 0) {
        return fallback(); // saddle or degenerate form
    }

    Eigen::Vector2d delta((-2.0 * qb * qd + qc * qe) / hdet, (-2.0 * qa * qe + qc * qd) / hdet);

    RefineStatus st = RefineStatus::Ok;
    if (delta.lpNorm<Eigen::Infinity>() > 1.0) {
        delta = delta.cwiseMax(-1.0).cwiseMin(1.0);
        st = RefineStatus::Clamped;
    }
    if (status) {
        *status = st;
    }
    return delta;
}

std::vector<CornerSet> cornerSets(int ndims, Contiguity contiguity, NdStrategy strategy) {

    if (ndims < 1) {
        throw std::invalid_argument("cornerSets: ndims must be >= 1");
    }

    std::vector<CornerSet> sets;
    std::vector<int> center(static_cast<std::size_t>(ndims), 0);

    if (strategy == NdStrategy::Symmetric) {

        CornerSet set;
        if (contiguity == Contiguity::Rook) {
            for (int i = 0; i < ndims; i++) {
                for (int s : {-1, +1}) {
                    std::vector<int> off(center);
                    off[static_cast<std::size_t>(i)] = s;
                    set.offsets.push_back(off);
                }
            }
        } else {
            long long total = 1;
            for (int i = 0; i < ndims; i++) {
                total *= 3;
            }
            for (long long code = 0; code < total; code++) {
                std::vector<int> off(static_cast<std::size_t>(ndims));
                long long rem = code;
                bool isCenter = true;
                for (int i = ndims - 1; i >= 0; i--) {
                    off[static_cast<std::size_t>(i)] = static_cast<int>(rem % 3) - 1;
                    isCenter = isCenter && off[static_cast<std::size_t>(i)] == 0;
                    rem /= 3;
                }
                if (!isCenter) {
                    set.offsets.push_back(off);
                }
            }
        }
        set.offsets.push_back(center);
        sets.push_back(std::move(set));
        return sets;
    }

    // split: one vertex set per quadrant sign vector
    int nQuadrants = 1 << ndims;
    for (int q = 0; q < nQuadrants; q++) {

        std::vector<int> sign(static_cast<std::size_t>(ndims));
        for (int i = 0; i < ndims; i++) {
            sign[static_cast<std::size_t>(i)] = (q >> (ndims - 1 - i)) & 1 ? +1 : -1;
        }

        CornerSet set;
        if (contiguity == Contiguity::Rook) {
            for (int i = 0; i < ndims; i++) {
                std::vector<int> off(center);
                off[static_cast<std::size_t>(i)] = sign[static_cast<std::size_t>(i)];
                set.offsets.push_back(off);
            }
        } else {
            for (int mask = 1; mask < (1 << ndims); mask++) {
                std::vector<int> off(center);
                for (int i = 0; i < ndims; i++) {
                    if (mask & (1 << (ndims - 1 - i))) {
                        off[static_cast<std::size_t>(i)] = sign[static_cast<std::size_t>(i)];
                    }
                }
                set.offsets.push_back(off);
            }
        }
        set.offsets.push_back(center);
        sets.push_back(std::move(set));
    }

    return sets;
}

namespace {

BarycentricSolution degenerateSolution(int nTargets, int dDims) {
    BarycentricSolution sol;
    sol.alpha = Eigen::VectorXd::Zero(std::max(nTargets - 1, 0));
    sol.beta = Eigen::VectorXd::Zero(nTargets);
    if (nTargets > 0) {
        sol.beta[nTargets - 1] = 1.0; // base vertex
    }
    sol.dHat = Eigen::VectorXd::Zero(dDims);
    sol.status = RefineStatus::DegenerateFallback;
    return sol;
}

// M = [t_1 - t_n, ..., t_{n-1} - t_n]
Eigen::MatrixXd differenceMatrix(TargetSet const& ts) {
    int n = ts.nTargets();
    Eigen::MatrixXd M(ts.targets.rows(), n - 1);
    for (int j = 0; j < n - 1; j++) {
        M.col(j) = ts.targets.col(j) - ts.targets.col(n - 1);
    }
    return M;
}

void assembleFromAlpha(BarycentricSolution& sol, TargetSet const& ts) {
    int n = ts.nTargets();
    sol.beta.resize(n);
    sol.beta.head(n - 1) = sol.alpha;
    sol.beta[n - 1] = 1.0 - sol.alpha.sum();
    sol.dHat = ts.D * sol.beta;
}

} // namespace

double barycentricCostAt(Eigen::VectorXd const& fs, TargetSet const& ts,
                         Eigen::VectorXd const& beta, CostKind costfn) {

    Eigen::VectorXd v = ts.targets * beta;

    switch (costfn) {
    case CostKind::NCC:
    case CostKind::ZNCC: {
        double nv = v.norm();
        double ns = fs.norm();
        if (nv < kDegenerateNorm || ns < kDegenerateNorm) {
            return std::numeric_limits<double>::infinity();
        }
        return -fs.dot(v) / (nv * ns);
    }
    case CostKind::SSD:
    case CostKind::ZSSD:
        return (fs - v).squaredNorm();
    case CostKind::SAD:
    case CostKind::ZSAD:
        return (fs - v).lpNorm<1>();
    }
    return 0;
}

BarycentricSolution nccBarycentricRefine(Eigen::VectorXd const& fs, TargetSet const& ts) {

    int n = ts.nTargets();
    int dDims = static_cast<int>(ts.D.rows());
    if (n < 2) {
        throw std::invalid_argument("nccBarycentricRefine: need at least two targets");
    }

    Eigen::MatrixXd M = differenceMatrix(ts);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrM(M);
    qrM.setThreshold(kRankTolerance);
    if (qrM.rank() < n - 1) {
        return degenerateSolution(n, dDims);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrA(ts.targets);
    qrA.setThreshold(kRankTolerance);
    if (qrA.rank() < n) {
        return degenerateSolution(n, dDims);
    }

    Eigen::VectorXd const& base = ts.targets.col(n - 1);

    Eigen::VectorXd fsPerp = ts.targets * qrA.solve(fs);
    Eigen::VectorXd ftPerp = base - M * qrM.solve(base);

    double ft2 = ftPerp.squaredNorm();
    double denom = ftPerp.dot(fsPerp);

    // affine hull through the origin, or source direction unreachable /
    // anti-correlated: no meaningful interior stationary point
    if (ft2 < kDegenerateNorm || denom < kDegenerateDenom) {
        return degenerateSolution(n, dDims);
    }

    Eigen::VectorXd fsHat = (ft2 / denom) * fsPerp;

    BarycentricSolution sol;
    sol.alpha = qrM.solve(fsHat - base);
    sol.status = RefineStatus::Ok;
    assembleFromAlpha(sol, ts);
    return sol;
}

BarycentricSolution ssdBarycentricRefine(Eigen::VectorXd const& fs, TargetSet const& ts) {

    int n = ts.nTargets();
    int dDims = static_cast<int>(ts.D.rows());
    if (n < 2) {
        throw std::invalid_argument("ssdBarycentricRefine: need at least two targets");
    }

    Eigen::MatrixXd M = differenceMatrix(ts);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrM(M);
    qrM.setThreshold(kRankTolerance);
    if (qrM.rank() < n - 1) {
        return degenerateSolution(n, dDims);
    }

    BarycentricSolution sol;
    sol.alpha = qrM.solve(fs - ts.targets.col(n - 1));
    sol.status = RefineStatus::Ok;
    assembleFromAlpha(sol, ts);
    return sol;
}

namespace {

// projection of g onto the null space of the rows of M indexed by `tight`
Eigen::VectorXd projectOffRows(Eigen::MatrixXd const& M, Eigen::VectorXd const& g,
                               std::vector<int> const& tight) {
    if (tight.empty()) {
        return g;
    }
    Eigen::MatrixXd Zt(M.cols(), static_cast<Eigen::Index>(tight.size()));
    for (std::size_t j = 0; j < tight.size(); j++) {
        Zt.col(static_cast<Eigen::Index>(j)) = M.row(tight[j]).transpose();
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Zt);
    return g - Zt * cod.solve(g);
}

// one-sided derivative of ||r - t*M*d||_1 at t = 0+, r the current residual
double directionalDerivative(Eigen::MatrixXd const& M, Eigen::VectorXd const& r,
                             Eigen::VectorXd const& d, double tightTol) {
    Eigen::VectorXd Md = M * d;
    double deriv = 0;
    for (Eigen::Index i = 0; i < r.size(); i++) {
        if (std::abs(r[i]) < tightTol) {
            deriv += std::abs(Md[i]);
        } else {
            deriv -= Md[i] * (r[i] > 0 ? 1.0 : -1.0);
        }
    }
    return deriv;
}

} // namespace

BarycentricSolution sadBarycentricRefine(Eigen::VectorXd const& fs, TargetSet const& ts,
                                         int maxIter) {

    int n = ts.nTargets();
    int dDims = static_cast<int>(ts.D.rows());
    if (n < 2) {
        throw std::invalid_argument("sadBarycentricRefine: need at least two targets");
    }

    Eigen::MatrixXd M = differenceMatrix(ts);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrM(M);
    qrM.setThreshold(kRankTolerance);
    if (qrM.rank() < n - 1) {
        return degenerateSolution(n, dDims);
    }

    Eigen::VectorXd b = fs - ts.targets.col(n - 1);
    double tightTol = 1e-9 * (1.0 + fs.lpNorm<Eigen::Infinity>());

    BarycentricSolution sol;
    sol.alpha = qrM.solve(b); // SSD start
    Eigen::VectorXd r = b - M * sol.alpha;
    double cost = r.lpNorm<1>();

    auto tightSet = [&](Eigen::VectorXd const& res) {
        std::vector<int> t;
        for (Eigen::Index i = 0; i < res.size(); i++) {
            if (std::abs(res[i]) < tightTol) {
                t.push_back(static_cast<int>(i));
            }
        }
        return t;
    };

    std::vector<int> tight = tightSet(r);
    sol.status = RefineStatus::NotConverged;

    for (int iter = 0; iter < maxIter; iter++) {

        Eigen::VectorXd s = Eigen::VectorXd::Zero(r.size());
        for (Eigen::Index i = 0; i < r.size(); i++) {
            if (std::abs(r[i]) >= tightTol) {
                s[i] = r[i] > 0 ? 1.0 : -1.0;
            }
        }
        Eigen::VectorXd g = M.transpose() * s;

        Eigen::VectorXd dir = projectOffRows(M, g, tight);
        double deriv = directionalDerivative(M, r, dir, tightTol);

        if (!(deriv < -kDescentTolerance)) {
            // pinned by the active hyperplanes: release the one whose
            // removal yields the steepest one-sided descent
            double bestDeriv = 0;
            Eigen::VectorXd bestDir;
            for (std::size_t j = 0; j < tight.size(); j++) {
                std::vector<int> reduced = tight;
                reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(j));
                Eigen::VectorXd dj = projectOffRows(M, g, reduced);
                double dd = directionalDerivative(M, r, dj, tightTol);
                if (dd < bestDeriv - kDescentTolerance) {
                    bestDeriv = dd;
                    bestDir = dj;
                }
            }
            if (!(bestDeriv < -kDescentTolerance)) {
                sol.status = RefineStatus::Ok; // optimal
                break;
            }
            dir = bestDir;
        }

        // weighted-median line search along dir
        Eigen::VectorXd Md = M * dir;
        std::vector<double> candidates;
        std::vector<double> weights;
        for (Eigen::Index i = 0; i < r.size(); i++) {
            if (std::abs(Md[i]) >= kDegenerateDenom) {
                candidates.push_back(r[i] / Md[i]);
                weights.push_back(std::abs(Md[i]));
            }
        }
        if (candidates.empty()) {
            sol.status = RefineStatus::Ok;
            break;
        }

        double t = weightedMedian(candidates, weights);
        sol.alpha += t * dir;
        r = b - M * sol.alpha;

        double newCost = r.lpNorm<1>();
        if (newCost > cost + 1e-12 * (1.0 + cost)) {
            sol.costMonotone = false;
        }
        cost = newCost;
        tight = tightSet(r);
        sol.iterations = iter + 1;
    }

    assembleFromAlpha(sol, ts);
    return sol;
}

BarycentricSolution refineNdForCost(Eigen::VectorXd const& fs, TargetSet const& ts,
                                    CostKind costfn, int sadMaxIter) {
    switch (costfn) {
    case CostKind::NCC:
    case CostKind::ZNCC:
        return nccBarycentricRefine(fs, ts);
    case CostKind::SSD:
    case CostKind::ZSSD:
        return ssdBarycentricRefine(fs, ts);
    case CostKind::SAD:
    case CostKind::ZSAD:
        return sadBarycentricRefine(fs, ts, sadMaxIter);
    }
    return {};
}

namespace {

// disparity-to-pixel convention shared with the cost volume: 1D disparities
// shift columns, 2D disparities shift (row, col)
bool targetVector(FeatureVolume const& Ft, int row, int col, std::span<const int> d,
                  Eigen::VectorXd& out) {
    int tr = row;
    int tc = col;
    if (d.size() == 1) {
        tc += d[0];
    } else {
        tr += d[0];
        tc += d[1];
    }
    if (tr < 0 || tr >= Ft.rows() || tc < 0 || tc >= Ft.cols() || Ft.valid(tr, tc) == 0) {
        return false;
    }
    out.resize(Ft.channels());
    float const* v = Ft.vec(tr, tc);
    for (int k = 0; k < Ft.channels(); k++) {
        out[k] = v[k];
    }
    return true;
}

bool buildTargetSet(FeatureVolume const& Ft, int row, int col, std::span<const int> dRound,
                    CornerSet const& corner, TargetSet& ts) {

    int n = static_cast<int>(corner.offsets.size());
    int nd = static_cast<int>(dRound.size());

    ts.D.resize(nd, n);
    ts.targets.resize(Ft.channels(), n);

    std::vector<int> d(static_cast<std::size_t>(nd));
    Eigen::VectorXd v;

    for (int j = 0; j < n; j++) {
        for (int i = 0; i < nd; i++) {
            d[static_cast<std::size_t>(i)] =
                dRound[static_cast<std::size_t>(i)] +
                corner.offsets[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            ts.D(i, j) = d[static_cast<std::size_t>(i)];
        }
        if (!targetVector(Ft, row, col, d, v)) {
            return false;
        }
        ts.targets.col(j) = v;
    }
    return true;
}

// clamp a split candidate into its admissible region and return the beta
// used for cost evaluation
bool clampToRegion(CornerSet const& corner, Contiguity contiguity,
                   Eigen::VectorXd const& dRoundV, BarycentricSolution& sol, bool& clamped) {

    int n = static_cast<int>(corner.offsets.size());

    if (contiguity == Contiguity::Rook) {
        if (sol.beta.minCoeff() >= -1e-6) {
            return true;
        }
        Eigen::VectorXd b = sol.beta.cwiseMax(0.0);
        double s = b.sum();
        if (s < kDegenerateDenom) {
            return false;
        }
        sol.beta = b / s;
        clamped = true;
        return true;
    }

    // queen: the candidate must lie inside the quadrant cell; clamp the
    // correction to the cell and rebuild beta as multilinear weights
    int nd = static_cast<int>(dRoundV.size());
    Eigen::VectorXd delta = sol.dHat - dRoundV;

    std::vector<int> sign(static_cast<std::size_t>(nd), 0);
    for (auto const& off : corner.offsets) {
        for (int i = 0; i < nd; i++) {
            if (off[static_cast<std::size_t>(i)] != 0) {
                sign[static_cast<std::size_t>(i)] = off[static_cast<std::size_t>(i)];
            }
        }
    }

    bool inside = true;
    Eigen::VectorXd u(nd); // fractional position toward the quadrant corner
    for (int i = 0; i < nd; i++) {
        double t = delta[i] * sign[static_cast<std::size_t>(i)];
        if (t < -1e-6 || t > 1.0 + 1e-6) {
            inside = false;
        }
        u[i] = std::clamp(t, 0.0, 1.0);
    }
    if (inside) {
        return true;
    }

    clamped = true;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; j++) {
        double w = 1.0;
        for (int i = 0; i < nd; i++) {
            bool corner_i = corner.offsets[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] != 0;
            w *= corner_i ? u[i] : (1.0 - u[i]);
        }
        beta[j] = w;
    }
    sol.beta = beta;
    return true;
}

} // namespace

RefinementResult featureRefineNd(Eigen::VectorXd const& fs, FeatureVolume const& Ft,
                                 int row, int col, std::span<const int> dRound,
                                 CostKind costfn, Contiguity contiguity, NdStrategy strategy) {

    int nd = static_cast<int>(dRound.size());
    RefinementResult out;
    out.delta = Eigen::VectorXd::Zero(nd);

    Eigen::VectorXd dRoundV(nd);
    for (int i = 0; i < nd; i++) {
        dRoundV[i] = dRound[static_cast<std::size_t>(i)];
    }

    std::vector<CornerSet> sets = cornerSets(nd, contiguity, strategy);

    if (strategy == NdStrategy::Symmetric) {

        TargetSet ts;
        if (!buildTargetSet(Ft, row, col, dRound, sets[0], ts)) {
            out.status = RefineStatus::NotRefinable;
            return out;
        }
        BarycentricSolution sol = refineNdForCost(fs, ts, costfn);
        if (sol.status == RefineStatus::DegenerateFallback) {
            out.status = RefineStatus::DegenerateFallback;
            return out;
        }

        out.delta = sol.dHat - dRoundV;
        out.status = sol.status;
        if (out.delta.lpNorm<Eigen::Infinity>() > 1.0) {
            out.delta = out.delta.cwiseMax(-1.0).cwiseMin(1.0);
            out.status = RefineStatus::Clamped;
        }
        return out;
    }

    double bestCost = std::numeric_limits<double>::infinity();
    bool found = false;
    bool anyReachable = false;
    Eigen::VectorXd bestDelta = Eigen::VectorXd::Zero(nd);
    RefineStatus bestStatus = RefineStatus::Ok;

    for (auto const& corner : sets) {

        TargetSet ts;
        if (!buildTargetSet(Ft, row, col, dRound, corner, ts)) {
            continue;
        }
        anyReachable = true;

        BarycentricSolution sol = refineNdForCost(fs, ts, costfn);
        if (sol.status == RefineStatus::DegenerateFallback) {
            continue;
        }

        bool clamped = false;
        if (!clampToRegion(corner, contiguity, dRoundV, sol, clamped)) {
            continue;
        }
        if (clamped) {
            sol.dHat = ts.D * sol.beta;
        }

        double c = barycentricCostAt(fs, ts, sol.beta, costfn);
        if (!found || c < bestCost) {
            found = true;
            bestCost = c;
            bestDelta = sol.dHat - dRoundV;
            bestStatus = clamped ? RefineStatus::Clamped : sol.status;
        }
    }

    if (!found) {
        out.status = anyReachable ? RefineStatus::DegenerateFallback : RefineStatus::NotRefinable;
        return out;
    }

    out.delta = bestDelta;
    out.status = bestStatus;
    if (out.delta.lpNorm<Eigen::Infinity>() > 1.0) {
        out.delta = out.delta.cwiseMax(-1.0).cwiseMin(1.0);
        out.status = RefineStatus::Clamped;
    }
    return out;
}

} // namespace subpix
