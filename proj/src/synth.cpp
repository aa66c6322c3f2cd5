#include "subpix/synth.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace subpix {

namespace {

double sampleLinear(NdBufferF const& img, int r, double x) {
    int x0 = static_cast<int>(std::floor(x));
    double f = x - x0;
    int x1 = std::min(x0 + 1, img.shape()[1] - 1);
    return (1.0 - f) * img(r, x0) + f * img(r, x1);
}

double sampleBilinear(NdBufferF const& img, double y, double x) {
    int y0 = static_cast<int>(std::floor(y));
    int x0 = static_cast<int>(std::floor(x));
    double fy = y - y0;
    double fx = x - x0;
    int y1 = std::min(y0 + 1, img.shape()[0] - 1);
    int x1 = std::min(x0 + 1, img.shape()[1] - 1);
    return (1.0 - fy) * ((1.0 - fx) * img(y0, x0) + fx * img(y0, x1)) +
           fy * ((1.0 - fx) * img(y1, x0) + fx * img(y1, x1));
}

} // namespace

SyntheticPair makeShiftedPair(NdBufferF const& base, std::vector<double> const& shift,
                              double noiseSigma, std::uint64_t seed) {

    if (base.rank() != 2) {
        throw std::invalid_argument("makeShiftedPair: rank-2 grayscale base required");
    }
    if (shift.size() != 1 && shift.size() != 2) {
        throw std::invalid_argument("makeShiftedPair: 1D or 2D shift required");
    }

    int rows = base.shape()[0];
    int cols = base.shape()[1];

    double sy = shift.size() == 2 ? shift[0] : 0.0;
    double sx = shift.size() == 2 ? shift[1] : shift[0];

    int my = static_cast<int>(std::ceil(std::abs(sy))) + 1;
    int mx = static_cast<int>(std::ceil(std::abs(sx))) + 1;
    if (std::abs(sy) >= rows || std::abs(sx) >= cols || rows - 2 * my <= 0 ||
        cols - 2 * mx <= 0) {
        throw std::invalid_argument("makeShiftedPair: shift too large for image");
    }

    int outRows = rows - 2 * my;
    int outCols = cols - 2 * mx;

    SyntheticPair pair;
    pair.shift = shift;
    pair.noiseSigma = noiseSigma;
    pair.source = NdBufferF({outRows, outCols}, 0.f);
    pair.target = NdBufferF({outRows, outCols}, 0.f);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noiseSigma);

    // The source is the resampled image: target samples stay on the base
    // grid, so linear interpolation between target pixels reproduces the
    // source exactly (the pair matches the refinement interpolation model).
    for (int r = 0; r < outRows; r++) {
        for (int c = 0; c < outCols; c++) {
            int gr = r + my;
            int gc = c + mx;

            double v = shift.size() == 1 ? sampleLinear(base, gr, gc + sx)
                                         : sampleBilinear(base, gr + sy, gc + sx);
            pair.source(r, c) = static_cast<float>(v);

            double t = base(gr, gc);
            if (noiseSigma > 0) {
                t += noise(rng);
            }
            pair.target(r, c) = static_cast<float>(t);
        }
    }
    return pair;
}

NdBufferF proceduralTexture(int rows, int cols, std::uint64_t seed) {

    if (rows <= 0 || cols <= 0) {
        throw std::invalid_argument("proceduralTexture: positive dimensions required");
    }

    std::mt19937_64 rng(seed);
    // band chosen so 5x5 windows see real gradients: much smoother and
    // subpixel estimators drown in texture-driven residuals
    std::uniform_real_distribution<double> freq(-0.35, 0.35);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> amp(0.5, 1.0);

    constexpr int kWaves = 24;
    struct Wave {
        double u, v, p, a;
    };
    std::vector<Wave> waves(kWaves);
    for (int k = 0; k < kWaves; k++) {
        waves[static_cast<std::size_t>(k)] = {freq(rng), freq(rng), phase(rng),
                                              amp(rng) / (1.0 + 0.3 * k)};
    }

    NdBufferF img({rows, cols}, 0.f);
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();

    std::vector<double> vals(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            double v = 0;
            for (auto const& w : waves) {
                v += w.a * std::sin(2.0 * M_PI * (w.u * c + w.v * r) + w.p);
            }
            vals[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    double span = hi - lo;
    if (span < 1e-12) {
        span = 1.0;
    }
    for (std::size_t i = 0; i < vals.size(); i++) {
        img.flat(i) = static_cast<float>(0.05 + 0.9 * (vals[i] - lo) / span);
    }
    return img;
}

double gridOracle1d(IntervalFeatures const& f, CostKind costfn, double step) {

    if (!(step > 0) || step > 0.1) {
        throw std::invalid_argument("gridOracle1d: step must be in (0, 0.1]");
    }

    long n = std::lround(1.0 / step);
    double best = 0;
    double bestCost = intervalCostAt(f, costfn, 0.0);

    for (long k = 1; k <= n; k++) {
        double delta = static_cast<double>(k) * step;
        double c = intervalCostAt(f, costfn, delta);
        if (c < bestCost) {
            bestCost = c;
            best = delta;
        }
    }
    return best;
}

OracleNd gridOracleNd(Eigen::VectorXd const& fs, TargetSet const& ts, CostKind costfn,
                      double step) {

    int n = ts.nTargets();
    if (n < 2 || n > 4) {
        throw std::invalid_argument("gridOracleNd: 2 to 4 targets supported");
    }
    if (!(step > 0) || step > 0.1) {
        throw std::invalid_argument("gridOracleNd: step must be in (0, 0.1]");
    }

    OracleNd out;
    out.cost = std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta(n);

    auto consider = [&](Eigen::VectorXd const& b) {
        double c = barycentricCostAt(fs, ts, b, costfn);
        if (c < out.cost) {
            out.cost = c;
            out.beta = b;
        }
    };

    // exhaustive simplex sweep of the n-1 free weights at grid pitch `pitch`,
    // restricted to the box [lo, hi] per free weight
    auto sweep = [&](double pitch, Eigen::VectorXd const& lo, Eigen::VectorXd const& hi) {
        auto steps = [&](int i) {
            long a = std::lround(std::ceil(lo[i] / pitch - 1e-9));
            long b = std::lround(std::floor(hi[i] / pitch + 1e-9));
            return std::pair<long, long>(std::max(a, 0L), b);
        };

        auto [a0, b0] = steps(0);
        for (long k0 = a0; k0 <= b0; k0++) {
            beta[0] = static_cast<double>(k0) * pitch;
            if (n == 2) {
                beta[1] = 1.0 - beta[0];
                if (beta[1] >= -1e-9) {
                    consider(beta);
                }
                continue;
            }
            auto [a1, b1] = steps(1);
            for (long k1 = a1; k1 <= b1; k1++) {
                beta[1] = static_cast<double>(k1) * pitch;
                if (n == 3) {
                    beta[2] = 1.0 - beta[0] - beta[1];
                    if (beta[2] >= -1e-9) {
                        consider(beta);
                    }
                    continue;
                }
                auto [a2, b2] = steps(2);
                for (long k2 = a2; k2 <= b2; k2++) {
                    beta[2] = static_cast<double>(k2) * pitch;
                    beta[3] = 1.0 - beta[0] - beta[1] - beta[2];
                    if (beta[3] >= -1e-9) {
                        consider(beta);
                    }
                }
            }
        }
    };

    Eigen::VectorXd lo = Eigen::VectorXd::Zero(n - 1);
    Eigen::VectorXd hi = Eigen::VectorXd::Ones(n - 1);

    // global pass(es) at the requested pitch, then a local zoom around the
    // optimum to push quantization well below the pitch; sound for the
    // convex cost families used here
    std::vector<double> pitches;
    if (n == 4 && step < 1e-2) {
        pitches.push_back(1e-2);
    }
    pitches.push_back(step);
    pitches.push_back(step / 16.0);

    for (std::size_t k = 0; k < pitches.size(); k++) {
        sweep(pitches[k], lo, hi);
        if (k + 1 < pitches.size()) {
            Eigen::VectorXd center = out.beta.head(n - 1);
            for (int i = 0; i < n - 1; i++) {
                lo[i] = std::max(0.0, center[i] - 2.0 * pitches[k]);
                hi[i] = std::min(1.0, center[i] + 2.0 * pitches[k]);
            }
        }
    }

    out.dHat = ts.D * out.beta;
    return out;
}

} // namespace subpix
