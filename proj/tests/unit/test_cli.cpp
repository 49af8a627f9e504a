#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sdof/cli.hpp"
#include "sdof/mot_io.hpp"

using namespace sdof;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run sdof_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "sdof");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workspace {
    fs::path root = fs::temp_directory_path() / "sdof_cli_test";
    Workspace() {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }
    std::string operator/(const char* name) const { return (root / name).string(); }
};

}  // namespace

TEST_CASE("synth, track, eval and overlay end to end") {
    Workspace ws;
    auto r = sdof_cli({"synth", "--out", ws / "scene", "--objects", "3", "--frames", "20", "--width", "200",
                       "--height", "160", "--seed", "4", "--no-overlap"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(ws / "scene/frames/000020.pgm"));
    CHECK(fs::exists(ws / "scene/det.txt"));

    r = sdof_cli({"track", "--frames", ws / "scene/frames", "--det", ws / "scene/det.txt", "--masks",
                  ws / "scene/masks", "--out", ws / "res.txt", "--points", ws / "points.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("frames=20 detection_frames=4 tracks_issued=3") != std::string::npos);
    CHECK(r.out.find("tracking_fps=") != std::string::npos);
    const auto rows = mot_io::parse_results(slurp(ws / "res.txt"));
    CHECK(rows.size() == 60);
    CHECK(std::is_sorted(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return std::pair(a.frame, a.id) < std::pair(b.frame, b.id); }));

    r = sdof_cli({"eval", "--gt", ws / "scene/gt.txt", "--res", ws / "res.txt"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("MOTA") != std::string::npos);
    CHECK(r.out.find("MT,ML,Rcll,Prcn,IDsw,Frag,MOTA") != std::string::npos);

    r = sdof_cli({"overlay", "--frames", ws / "scene/frames", "--res", ws / "res.txt", "--points", ws / "points.csv",
                  "--out", ws / "overlay"});
    REQUIRE(r.code == 0);
    const auto ppm = imaging::load_ppm(imaging::read_file(ws / "overlay/000001.ppm"));
    CHECK(ppm.width() == 200);
    CHECK(ppm.height() == 160);
}

TEST_CASE("config L controls the detection frames") {
    Workspace ws;
    REQUIRE(sdof_cli({"synth", "--out", ws / "scene", "--objects", "2", "--frames", "35", "--width", "200",
                      "--height", "160"})
                .code == 0);
    {
        std::ofstream cfg(ws / "cfg.txt");
        cfg << "L = 15\n";
    }
    const auto r = sdof_cli({"track", "--frames", ws / "scene/frames", "--det", ws / "scene/det.txt", "--config",
                             ws / "cfg.txt", "--out", ws / "res.txt"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("detection_frames=3 ") != std::string::npos);

    {
        std::ofstream cfg(ws / "bad.txt");
        cfg << "L = zero\n";
    }
    const auto bad = sdof_cli({"track", "--frames", ws / "scene/frames", "--det", ws / "scene/det.txt", "--config",
                               ws / "bad.txt", "--out", ws / "res.txt"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("L") != std::string::npos);
}

TEST_CASE("missing frame is a data error naming the file") {
    Workspace ws;
    REQUIRE(sdof_cli({"synth", "--out", ws / "scene", "--objects", "1", "--frames", "5", "--width", "160",
                      "--height", "180"})
                .code == 0);
    fs::remove(ws / "scene/frames/000003.pgm");
    const auto r = sdof_cli({"track", "--frames", ws / "scene/frames", "--det", ws / "scene/det.txt", "--out",
                             ws / "res.txt"});
    CHECK(r.code == 2);
    CHECK(r.err.find("000003.pgm") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(sdof_cli({}).code == 1);
    CHECK(sdof_cli({"track", "--bogus"}).code == 1);
    CHECK(sdof_cli({"eval", "--gt", "a", "--res", "b", "--iou", "1.5"}).code == 1);
    CHECK(sdof_cli({"bench", "--scene", "nowhere", "--L", ""}).code == 1);
    CHECK(sdof_cli({"bench", "--scene", "nowhere", "--L", "1,x"}).code == 1);
    CHECK(sdof_cli({"--help"}).code == 0);
}

TEST_CASE("bench prints one row per L") {
    Workspace ws;
    REQUIRE(sdof_cli({"synth", "--out", ws / "scene", "--objects", "2", "--frames", "12", "--width", "160",
                      "--height", "140"})
                .code == 0);
    const auto r = sdof_cli({"bench", "--scene", ws / "scene", "--L", "1,3", "--det-latency-ms", "50", "--csv",
                             ws / "bench.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("L,MOTA,IDsw,tracking_ms_per_frame,simulated_fps\n1,", 0) == 0);
    CHECK(r.out.find("\n3,") != std::string::npos);
    CHECK(slurp(ws / "bench.csv") == r.out);
}

TEST_CASE("overlay rejects results past the last frame") {
    Workspace ws;
    REQUIRE(sdof_cli({"synth", "--out", ws / "scene", "--objects", "1", "--frames", "3", "--width", "160",
                      "--height", "180"})
                .code == 0);
    {
        std::ofstream res(ws / "res.txt");
        res << "9,1,10,10,20,40,1,-1,-1,-1\n";
    }
    const auto r = sdof_cli({"overlay", "--frames", ws / "scene/frames", "--res", ws / "res.txt", "--out",
                             ws / "overlay"});
    CHECK(r.code == 2);
}

TEST_CASE("overlay drawing") {
    imaging::RgbImage img(40, 30, imaging::Rgb{0, 0, 0});
    cli::draw_overlay(img, {{1, 7, {5, 5, 20, 15}, 1.0, {-1, -1, -1}}}, {{7, {30.2, 25.8}}});
    const auto c = cli::id_color(7);
    CHECK(img.at(5, 5) == c);
    CHECK(img.at(24, 19) == c);
    CHECK(img.at(15, 12) == imaging::Rgb{0, 0, 0});
    CHECK(img.at(30, 26) == c);
    // The digit 7 starts with a full top bar at (x0 + 2, y0 + 2).
    CHECK(img.at(7, 7) == c);
    CHECK(img.at(9, 7) == c);

    // Boxes partly outside the image are clipped, not rejected.
    CHECK_NOTHROW(cli::draw_overlay(img, {{1, 3, {-10, -10, 100, 100}, 1.0, {-1, -1, -1}}}, {}));
    CHECK(cli::id_color(1) != cli::id_color(2));
    CHECK(cli::id_color(5) == cli::id_color(5));
}
