// End-to-end checks of the subpix command-line tool. Invoked with the CLI
// binary path as argv[1]; spawns it through the shell and inspects exit
// codes and report files.
#include "subpix/io.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int gFailures = 0;

void check(bool ok, std::string const& what) {
    if (ok) {
        std::cout << "ok:   " << what << "\n";
    } else {
        std::cout << "FAIL: " << what << "\n";
        gFailures++;
    }
}

int runCli(std::string const& cmd) {
    int rc = std::system(cmd.c_str());
    if (rc == -1) {
        return -1;
    }
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(fs::path const& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <subpix-binary>\n";
        return 2;
    }
    std::string cli = argv[1];

    fs::path dir = fs::temp_directory_path() / "subpix_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string d = dir.string();
    std::string quiet = " > /dev/null 2>&1";

    // fixture generation
    int rc = runCli(cli + " synth --out-dir " + d + "/fix --rows 72 --cols 72 --seed 3"
                          " --shift 0.3" + quiet);
    check(rc == 0, "synth exits 0");
    check(fs::exists(dir / "fix/pair0_src.pfm") && fs::exists(dir / "fix/pair0_tgt.pfm") &&
              fs::exists(dir / "fix/pair0_gt.pfm"),
          "synth writes source, target and truth");

    // stereo run producing CSV, JSON and PFM outputs
    auto stereoCmd = [&](std::string const& csvPath) {
        return cli + " stereo --source " + d + "/fix/pair0_src.pfm" +
               " --target " + d + "/fix/pair0_tgt.pfm" +
               " --ground-truth " + d + "/fix/pair0_gt.pfm" +
               " --method barycentric-split --cost zncc --window 5" +
               " --d-min -2 --d-max 2" +
               " --out-csv " + csvPath +
               " --out-json " + d + "/report.json" +
               " --out-pfm " + d + "/refined.pfm" +
               " --status-map " + d + "/status.pgm";
    };
    rc = runCli(stereoCmd(d + "/report.csv") + quiet);
    check(rc == 0, "stereo exits 0");

    std::string csv = slurp(dir / "report.csv");
    check(csv.rfind("# subpix-report v1\n", 0) == 0, "CSV starts with the report header");
    check(csv.find("method,cost,window,mae_px,snr_db,md_px,runtime_ms,status") !=
              std::string::npos,
          "CSV carries the schema line");
    check(csv.find("barycentric-split,zncc,5,") != std::string::npos,
          "CSV row names the configuration");
    check(csv.find(",0,ok") != std::string::npos, "runtime is 0 without --timing");

    std::string json = slurp(dir / "report.json");
    check(json.find("\"mae_px\"") != std::string::npos &&
              json.find("\"bin_table\"") != std::string::npos,
          "JSON mirror contains metrics and the bin table");

    check(fs::exists(dir / "refined.pfm") && fs::exists(dir / "status.pgm"),
          "stereo writes disparity and status map");
    try {
        subpix::DisparityField refined = subpix::readPfm((dir / "refined.pfm").string());
        check(refined.dims() == 1 && refined.rows() > 0, "refined PFM parses back");
    } catch (std::exception const& e) {
        check(false, std::string("refined PFM parses back: ") + e.what());
    }

    // reruns are byte-identical (timing off by default)
    rc = runCli(stereoCmd(d + "/report2.csv") + quiet);
    check(rc == 0 && slurp(dir / "report.csv") == slurp(dir / "report2.csv"),
          "rerun produces a byte-identical CSV");

    // table subcommand covers the grid and flags unusable cells
    rc = runCli(cli + " table --source " + d + "/fix/pair0_src.pfm" +
                " --target " + d + "/fix/pair0_tgt.pfm" +
                " --ground-truth " + d + "/fix/pair0_gt.pfm" +
                " --methods parabola paraboloid --costs zncc --windows 5" +
                " --d-min -2 --d-max 2 --out-csv " + d + "/table.csv" + quiet);
    std::string table = slurp(dir / "table.csv");
    check(rc == 0, "table exits 0");
    check(table.find("parabola,zncc,5,") != std::string::npos, "table holds the valid cell");
    check(table.find("paraboloid,zncc,5,,,,0,error") != std::string::npos,
          "table marks 2D-only methods as error rows in 1D mode");

    // flow pipeline on a 2D fixture
    rc = runCli(cli + " synth --out-dir " + d + "/flow --rows 64 --cols 64 --seed 5 --flow"
                      " --shift 0.3 -0.4" + quiet);
    check(rc == 0 && fs::exists(dir / "flow/pair0_gt.flo"), "synth --flow writes .flo truth");

    rc = runCli(cli + " flow --source " + d + "/flow/pair0_src.pfm" +
                " --target " + d + "/flow/pair0_tgt.pfm" +
                " --ground-truth " + d + "/flow/pair0_gt.flo" +
                " --method queen-split --cost zncc --window 5 --range -2 2 -2 2" +
                " --out-flo " + d + "/refined.flo --out-csv " + d + "/flow.csv" + quiet);
    check(rc == 0, "flow exits 0");
    check(fs::exists(dir / "refined.flo"), "flow writes a .flo result");
    check(slurp(dir / "flow.csv").find("queen-split,zncc,5,") != std::string::npos,
          "flow CSV row present");

    // error paths
    rc = runCli(cli + " stereo --source " + d + "/fix/pair0_src.pfm" +
                " --target " + d + "/fix/pair0_tgt.pfm" +
                " --ground-truth " + d + "/missing.pfm" + quiet);
    check(rc == 3, "missing ground truth exits 3");

    rc = runCli(cli + " stereo --source " + d + "/fix/pair0_src.pfm" +
                " --target " + d + "/fix/pair0_tgt.pfm" +
                " --ground-truth " + d + "/fix/pair0_gt.pfm --method bogus" + quiet);
    check(rc == 2, "unknown method exits 2");

    rc = runCli(cli + " stereo --no-such-flag" + quiet);
    check(rc == 2, "unknown flag exits 2");

    rc = runCli(cli + quiet);
    check(rc == 2, "missing subcommand exits 2");

    // corrupt input file exits 3
    {
        std::ofstream bad(dir / "bad.pfm", std::ios::binary);
        bad << "Pf\n4 4\n-1.0\nxx";
    }
    rc = runCli(cli + " stereo --source " + d + "/bad.pfm" +
                " --target " + d + "/fix/pair0_tgt.pfm" +
                " --ground-truth " + d + "/fix/pair0_gt.pfm" + quiet);
    check(rc == 3, "truncated PFM input exits 3");

    std::cout << (gFailures == 0 ? "all CLI checks passed\n"
                                 : std::to_string(gFailures) + " CLI checks failed\n");
    return gFailures == 0 ? 0 : 1;
}
