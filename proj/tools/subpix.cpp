#include "subpix/eval.hpp"
#include "subpix/io.hpp"
#include "subpix/pipeline.hpp"
#include "subpix/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

using nlohmann::json;

void applyThreadCap() {
    char const* env = std::getenv("SUBPIX_THREADS");
    if (env && *env) {
        int n = std::atoi(env);
        if (n > 0) {
            omp_set_num_threads(n);
        }
    }
}

struct CommonOpts {
    std::string cost = "zncc";
    int window = 5;
    std::string method = "parabola";
    bool interpAfterWhitening = false;
    double inlierThreshold = 1.0;
    bool timing = false;
    std::string statusMapPath;
};

void addCommonFlags(CLI::App* app, CommonOpts& o) {
    app->add_option("--cost", o.cost, "cost function (ncc|zncc|ssd|zssd|sad|zsad)");
    app->add_option("--window", o.window, "square window side (odd)");
    app->add_option("--method", o.method, "refinement method");
    app->add_flag("--interp-after-whitening", o.interpAfterWhitening,
                  "interpolate whitened features instead of raw ones");
    app->add_option("--inlier-threshold", o.inlierThreshold, "inlier threshold in px");
    app->add_flag("--timing", o.timing, "measure runtime (breaks byte-determinism of reports)");
    app->add_option("--status-map", o.statusMapPath, "write per-pixel status codes as PGM");
}

subpix::CostKind parseCost(std::string const& name) {
    for (auto kind : {subpix::CostKind::NCC, subpix::CostKind::ZNCC, subpix::CostKind::SSD,
                      subpix::CostKind::ZSSD, subpix::CostKind::SAD, subpix::CostKind::ZSAD}) {
        if (name == subpix::costName(kind)) {
            return kind;
        }
    }
    throw CLI::ValidationError("--cost", "unknown cost function: " + name);
}

std::string formatDouble(double v) {
    std::ostringstream ss;
    ss.precision(9);
    ss << v;
    return ss.str();
}

std::string csvHeader() {
    return "# subpix-report v1\nmethod,cost,window,mae_px,snr_db,md_px,runtime_ms,status\n";
}

std::string csvRow(std::string const& method, std::string const& cost, int window,
                   subpix::EvalReport const* rep, long long runtimeMs, std::string const& status) {
    std::string row = method + "," + cost + "," + std::to_string(window) + ",";
    if (rep) {
        row += formatDouble(rep->maePx) + "," + formatDouble(rep->snrDb) + "," +
               formatDouble(rep->mdPx) + ",";
    } else {
        row += ",,,";
    }
    row += std::to_string(runtimeMs) + "," + status + "\n";
    return row;
}

json reportJson(subpix::EvalReport const& rep) {
    json j;
    j["mae_px"] = rep.maePx;
    j["md_px"] = rep.mdPx;
    j["snr_linear"] = rep.snrLinear;
    j["snr_db"] = std::isfinite(rep.snrDb) ? json(rep.snrDb) : json(nullptr);
    j["n_inliers"] = rep.nInliers;
    json bins = json::array();
    for (auto const& b : rep.binTable) {
        bins.push_back({{"lo", b.lo},
                        {"hi", b.hi},
                        {"mean_error", b.count > 0 ? json(b.meanError) : json(nullptr)},
                        {"count", b.count}});
    }
    j["bin_table"] = bins;
    return j;
}

void writeStatusMap(std::string const& path, subpix::MaskBuffer const& status) {
    subpix::NdBufferF img({status.shape()[0], status.shape()[1]}, 0.f);
    for (std::size_t i = 0; i < status.size(); i++) {
        img.flat(i) = static_cast<float>(status.flat(i)) * 32.f / 255.f;
    }
    subpix::writePgm(path, img);
}

struct RunResult {
    subpix::MatchOutput match;
    subpix::EvalReport report;
    long long runtimeMs = 0;
};

RunResult runPipeline(subpix::NdBufferF const& src, subpix::NdBufferF const& tgt,
                      subpix::DisparityField const& gt, subpix::MatchConfig const& cfg,
                      double inlierThreshold, bool timing) {
    RunResult rr;
    auto t0 = std::chrono::steady_clock::now();
    rr.match = subpix::matchAndRefine(src, tgt, cfg);
    auto t1 = std::chrono::steady_clock::now();
    if (timing) {
        rr.runtimeMs =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    }
    rr.report = subpix::evaluate(rr.match.refined, rr.match.discrete, gt, inlierThreshold);
    return rr;
}

subpix::MatchConfig makeConfig(CommonOpts const& o, subpix::SearchRange const& range) {
    auto method = subpix::parseMethod(o.method);
    if (!method) {
        throw CLI::ValidationError("--method", "unknown method: " + o.method);
    }
    if (o.window < 1 || o.window % 2 == 0) {
        throw CLI::ValidationError("--window", "window side must be odd and positive");
    }
    subpix::MatchConfig cfg;
    cfg.costfn = parseCost(o.cost);
    cfg.windowSide = o.window;
    cfg.range = range;
    cfg.method = *method;
    cfg.interpolateAfterWhitening = o.interpAfterWhitening;
    if (!subpix::methodSupportsDims(cfg.method, range.dims())) {
        throw CLI::ValidationError("--method", std::string("method ") + o.method +
                                                   " does not apply to " +
                                                   std::to_string(range.dims()) + "D search");
    }
    return cfg;
}

int cmdStereo(std::string const& sourcePath, std::string const& targetPath,
              std::string const& gtPath, CommonOpts const& o, int dMin, int dMax,
              std::string const& outPfm, std::string const& outCsv,
              std::string const& outJson) {

    subpix::NdBufferF src = subpix::readImage(sourcePath);
    subpix::NdBufferF tgt = subpix::readImage(targetPath);
    subpix::DisparityField gt = subpix::readPfm(gtPath);

    subpix::MatchConfig cfg = makeConfig(o, subpix::SearchRange::range1d(dMin, dMax));
    RunResult rr = runPipeline(src, tgt, gt, cfg, o.inlierThreshold, o.timing);

    if (!outPfm.empty()) {
        subpix::writePfm(outPfm, rr.match.refined);
    }
    if (!o.statusMapPath.empty()) {
        writeStatusMap(o.statusMapPath, rr.match.status);
    }
    std::string csv = csvHeader() + csvRow(o.method, o.cost, o.window, &rr.report,
                                           rr.runtimeMs, "ok");
    if (!outCsv.empty()) {
        subpix::writeFileBytes(outCsv, csv);
    }
    if (!outJson.empty()) {
        json j = reportJson(rr.report);
        j["method"] = o.method;
        j["cost"] = o.cost;
        j["window"] = o.window;
        subpix::writeFileBytes(outJson, j.dump(2) + "\n");
    }
    std::cout << csv;
    return 0;
}

int cmdFlow(std::string const& sourcePath, std::string const& targetPath,
            std::string const& gtPath, CommonOpts const& o, std::vector<int> const& range4,
            std::string const& outFlo, std::string const& outCsv, std::string const& outJson) {

    subpix::NdBufferF src = subpix::readImage(sourcePath);
    subpix::NdBufferF tgt = subpix::readImage(targetPath);
    subpix::DisparityField gt = subpix::readFlo(gtPath);
    // .flo is (u, v) = (col, row) displacement; internal order is (row, col)
    for (int r = 0; r < gt.rows(); r++) {
        for (int c = 0; c < gt.cols(); c++) {
            std::swap(gt.vec(r, c)[0], gt.vec(r, c)[1]);
        }
    }

    subpix::MatchConfig cfg = makeConfig(
        o, subpix::SearchRange::range2d(range4[0], range4[1], range4[2], range4[3]));
    RunResult rr = runPipeline(src, tgt, gt, cfg, o.inlierThreshold, o.timing);

    // .flo stores (u, v) = (col, row) displacement; internal order is (row, col)
    subpix::DisparityField flo = subpix::DisparityField::make(rr.match.refined.rows(),
                                                              rr.match.refined.cols(), 2);
    for (int r = 0; r < flo.rows(); r++) {
        for (int c = 0; c < flo.cols(); c++) {
            flo.valid(r, c) = rr.match.refined.valid(r, c);
            flo.vec(r, c)[0] = rr.match.refined.vec(r, c)[1];
            flo.vec(r, c)[1] = rr.match.refined.vec(r, c)[0];
        }
    }
    if (!outFlo.empty()) {
        subpix::writeFlo(outFlo, flo);
    }
    if (!o.statusMapPath.empty()) {
        writeStatusMap(o.statusMapPath, rr.match.status);
    }

    std::string csv = csvHeader() + csvRow(o.method, o.cost, o.window, &rr.report,
                                           rr.runtimeMs, "ok");
    if (!outCsv.empty()) {
        subpix::writeFileBytes(outCsv, csv);
    }
    if (!outJson.empty()) {
        json j = reportJson(rr.report);
        j["method"] = o.method;
        j["cost"] = o.cost;
        j["window"] = o.window;
        subpix::writeFileBytes(outJson, j.dump(2) + "\n");
    }
    std::cout << csv;
    return 0;
}

int cmdTable(std::string const& sourcePath, std::string const& targetPath,
             std::string const& gtPath, std::vector<std::string> const& methods,
             std::vector<int> const& windows, std::vector<std::string> const& costs,
             CommonOpts const& o, int dMin, int dMax, std::string const& outCsv) {

    subpix::NdBufferF src = subpix::readImage(sourcePath);
    subpix::NdBufferF tgt = subpix::readImage(targetPath);
    subpix::DisparityField gt = subpix::readPfm(gtPath);

    std::string csv = csvHeader();
    for (auto const& method : methods) {
        for (auto const& cost : costs) {
            for (int window : windows) {
                CommonOpts cell = o;
                cell.method = method;
                cell.cost = cost;
                cell.window = window;
                try {
                    subpix::MatchConfig cfg =
                        makeConfig(cell, subpix::SearchRange::range1d(dMin, dMax));
                    RunResult rr =
                        runPipeline(src, tgt, gt, cfg, o.inlierThreshold, o.timing);
                    csv += csvRow(method, cost, window, &rr.report, rr.runtimeMs, "ok");
                } catch (std::exception const&) {
                    csv += csvRow(method, cost, window, nullptr, 0, "error");
                }
            }
        }
    }
    if (!outCsv.empty()) {
        subpix::writeFileBytes(outCsv, csv);
    }
    std::cout << csv;
    return 0;
}

int cmdSynth(std::string const& outDir, int rows, int cols, std::uint64_t seed,
             std::vector<double> const& shifts, bool flow, double noiseSigma) {

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(outDir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory: " + outDir);
    }

    subpix::NdBufferF base = subpix::proceduralTexture(rows, cols, seed);

    int index = 0;
    for (std::size_t i = 0; i < shifts.size(); i += flow ? 2 : 1) {
        std::vector<double> shift;
        shift.push_back(shifts[i]);
        if (flow) {
            if (i + 1 >= shifts.size()) {
                throw CLI::ValidationError("--shift", "flow shifts need pairs of values");
            }
            shift.push_back(shifts[i + 1]);
        }

        subpix::SyntheticPair pair =
            subpix::makeShiftedPair(base, shift, noiseSigma, seed + 1000 + i);

        std::string stem = outDir + "/pair" + std::to_string(index);

        auto toField = [](subpix::NdBufferF const& img) {
            subpix::DisparityField f =
                subpix::DisparityField::make(img.shape()[0], img.shape()[1], 1);
            for (int r = 0; r < f.rows(); r++) {
                for (int c = 0; c < f.cols(); c++) {
                    f.valid(r, c) = 1;
                    f.vec(r, c)[0] = img(r, c);
                }
            }
            return f;
        };
        subpix::writePfm(stem + "_src.pfm", toField(pair.source));
        subpix::writePfm(stem + "_tgt.pfm", toField(pair.target));

        int n = flow ? 2 : 1;
        subpix::DisparityField truth = subpix::DisparityField::make(
            pair.source.shape()[0], pair.source.shape()[1], flow ? 2 : 1);
        for (int r = 0; r < truth.rows(); r++) {
            for (int c = 0; c < truth.cols(); c++) {
                truth.valid(r, c) = 1;
                for (int k = 0; k < n; k++) {
                    // .flo truth stored as (u, v); 1D truth as plain disparity
                    double v = flow ? shift[static_cast<std::size_t>(1 - k)]
                                    : shift[static_cast<std::size_t>(k)];
                    truth.vec(r, c)[k] = static_cast<float>(v);
                }
            }
        }
        if (flow) {
            subpix::writeFlo(stem + "_gt.flo", truth);
        } else {
            subpix::writePfm(stem + "_gt.pfm", truth);
        }
        index++;
    }
    std::cout << "wrote " << index << " pairs to " << outDir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {

    applyThreadCap();

    CLI::App app{"patch-based matching with subpixel disparity refinement"};
    app.require_subcommand(1);

    CommonOpts stereoOpts, flowOpts, tableOpts;

    // stereo
    auto* stereo = app.add_subcommand("stereo", "1D disparity estimation against PFM truth");
    std::string sSrc, sTgt, sGt, sOutPfm, sOutCsv, sOutJson;
    int sDMin = -8, sDMax = 8;
    stereo->add_option("--source", sSrc, "source image")->required();
    stereo->add_option("--target", sTgt, "target image")->required();
    stereo->add_option("--ground-truth", sGt, "PFM disparity truth")->required();
    stereo->add_option("--d-min", sDMin, "search range lower bound");
    stereo->add_option("--d-max", sDMax, "search range upper bound");
    stereo->add_option("--out-pfm", sOutPfm, "refined disparity output");
    stereo->add_option("--out-csv", sOutCsv, "CSV report path");
    stereo->add_option("--out-json", sOutJson, "JSON report path");
    addCommonFlags(stereo, stereoOpts);

    // flow
    auto* flowCmd = app.add_subcommand("flow", "2D flow estimation against .flo truth");
    std::string fSrc, fTgt, fGt, fOutFlo, fOutCsv, fOutJson;
    std::vector<int> fRange{-4, 4, -4, 4};
    flowCmd->add_option("--source", fSrc, "source image")->required();
    flowCmd->add_option("--target", fTgt, "target image")->required();
    flowCmd->add_option("--ground-truth", fGt, ".flo truth")->required();
    flowCmd->add_option("--range", fRange, "search range: rowLo rowHi colLo colHi")
        ->expected(4);
    flowCmd->add_option("--out-flo", fOutFlo, "refined flow output");
    flowCmd->add_option("--out-csv", fOutCsv, "CSV report path");
    flowCmd->add_option("--out-json", fOutJson, "JSON report path");
    addCommonFlags(flowCmd, flowOpts);

    // table
    auto* table = app.add_subcommand("table", "method x window x cost comparison grid");
    std::string tSrc, tTgt, tGt, tOutCsv;
    std::vector<std::string> tMethods{"parabola", "barycentric-split"};
    std::vector<int> tWindows{5};
    std::vector<std::string> tCosts{"zncc"};
    int tDMin = -8, tDMax = 8;
    table->add_option("--source", tSrc, "source image")->required();
    table->add_option("--target", tTgt, "target image")->required();
    table->add_option("--ground-truth", tGt, "PFM disparity truth")->required();
    table->add_option("--methods", tMethods, "methods to compare");
    table->add_option("--windows", tWindows, "window sides");
    table->add_option("--costs", tCosts, "cost functions");
    table->add_option("--d-min", tDMin, "search range lower bound");
    table->add_option("--d-max", tDMax, "search range upper bound");
    table->add_option("--out-csv", tOutCsv, "CSV report path");
    addCommonFlags(table, tableOpts);

    // synth
    auto* synth = app.add_subcommand("synth", "generate shifted synthetic pairs with truth");
    std::string ynOut;
    int ynRows = 96, ynCols = 96;
    std::uint64_t ynSeed = 7;
    std::vector<double> ynShifts{0.3};
    bool ynFlow = false;
    double ynNoise = 0;
    synth->add_option("--out-dir", ynOut, "output directory")->required();
    synth->add_option("--rows", ynRows, "texture rows");
    synth->add_option("--cols", ynCols, "texture cols");
    synth->add_option("--seed", ynSeed, "texture/noise seed");
    synth->add_option("--shift", ynShifts, "shift list (pairs of values with --flow)");
    synth->add_flag("--flow", ynFlow, "2D shifts, truth written as .flo");
    synth->add_option("--noise-sigma", ynNoise, "additive Gaussian noise sigma");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (stereo->parsed()) {
            return cmdStereo(sSrc, sTgt, sGt, stereoOpts, sDMin, sDMax, sOutPfm, sOutCsv,
                             sOutJson);
        }
        if (flowCmd->parsed()) {
            return cmdFlow(fSrc, fTgt, fGt, flowOpts, fRange, fOutFlo, fOutCsv, fOutJson);
        }
        if (table->parsed()) {
            return cmdTable(tSrc, tTgt, tGt, tMethods, tWindows, tCosts, tableOpts, tDMin,
                            tDMax, tOutCsv);
        }
        if (synth->parsed()) {
            return cmdSynth(ynOut, ynRows, ynCols, ynSeed, ynShifts, ynFlow, ynNoise);
        }
    } catch (CLI::ValidationError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (subpix::FormatError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (std::invalid_argument const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (std::runtime_error const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (std::exception const& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
