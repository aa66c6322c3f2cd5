#include "subpix/pipeline.hpp"
#include "subpix/synth.hpp"

#include <CLI11.hpp>

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>

namespace {

double timeMs(auto&& fn, int repeats) {
    double best = 1e300;
    for (int i = 0; i < repeats; i++) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {

    CLI::App app{"serial vs. OpenMP pipeline benchmark"};
    int rows = 256, cols = 256;
    int window = 5;
    int repeats = 3;
    std::string method = "barycentric-split";
    std::string cost = "zncc";
    app.add_option("--rows", rows);
    app.add_option("--cols", cols);
    app.add_option("--window", window);
    app.add_option("--repeats", repeats);
    app.add_option("--method", method);
    app.add_option("--cost", cost);
    CLI11_PARSE(app, argc, argv);

    char const* env = std::getenv("SUBPIX_THREADS");
    if (env && *env) {
        int n = std::atoi(env);
        if (n > 0) {
            omp_set_num_threads(n);
        }
    }

    auto m = subpix::parseMethod(method);
    if (!m) {
        std::cerr << "unknown method: " << method << "\n";
        return 2;
    }

    subpix::NdBufferF base = subpix::proceduralTexture(rows + 8, cols + 8, 42);
    subpix::SyntheticPair pair = subpix::makeShiftedPair(base, {0.35}, 0.0, 42);

    subpix::MatchConfig cfg;
    cfg.method = *m;
    cfg.windowSide = window;
    cfg.range = subpix::SearchRange::range1d(-3, 3);
    for (auto kind : {subpix::CostKind::NCC, subpix::CostKind::ZNCC, subpix::CostKind::SSD,
                      subpix::CostKind::ZSSD, subpix::CostKind::SAD, subpix::CostKind::ZSAD}) {
        if (cost == subpix::costName(kind)) {
            cfg.costfn = kind;
        }
    }

    subpix::MatchOutput serialOut, parallelOut;
    double serialMs = timeMs(
        [&] { serialOut = subpix::reference::matchAndRefineSerial(pair.source, pair.target, cfg); },
        repeats);
    double parallelMs =
        timeMs([&] { parallelOut = subpix::matchAndRefine(pair.source, pair.target, cfg); },
               repeats);

    bool identical = serialOut.refined.values == parallelOut.refined.values &&
                     serialOut.status == parallelOut.status;

    std::cout << "pixels: " << pair.source.shape()[0] * pair.source.shape()[1] << "\n"
              << "threads: " << omp_get_max_threads() << "\n"
              << "serial_ms: " << serialMs << "\n"
              << "parallel_ms: " << parallelMs << "\n"
              << "speedup: " << serialMs / parallelMs << "\n"
              << "outputs_identical: " << (identical ? "yes" : "no") << "\n";

    return identical ? 0 : 1;
}
