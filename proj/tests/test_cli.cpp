#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("codim1_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct RunResult {
    int exit_code;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

RunResult run_cli(const TempDir& tmp, const std::string& args) {
    fs::path so = tmp.path / "stdout.txt", se = tmp.path / "stderr.txt";
    std::string cmd = std::string(CODIM1LAB_BIN) + " " + args + " >" + so.string() + " 2>" + se.string();
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& body) {
    fs::path p = dir / name;
    std::ofstream(p) << body;
    return p;
}

const char* kSphereConfig = R"({
  "geometry": { "kind": "sphere", "radius": 1.0 },
  "n_u": 24, "n_s": 12,
  "epsilons": [0.2, 0.1],
  "m_max": 0.5,
  "seed": 1234
})";

}  // namespace

TEST_CASE("help exits zero and lists subcommands") {
    TempDir tmp;
    auto r = run_cli(tmp, "--help");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("spectrum") != std::string::npos);
    CHECK(r.out.find("curvature") != std::string::npos);
}

TEST_CASE("missing config file exits one with error prefix") {
    TempDir tmp;
    auto r = run_cli(tmp, "index --config " + (tmp.path / "nope.json").string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("error:") == 0);
}

TEST_CASE("unknown subcommand exits one") {
    TempDir tmp;
    auto r = run_cli(tmp, "frobnicate");
    CHECK(r.exit_code == 1);
}

TEST_CASE("empty epsilon list is rejected verbatim") {
    TempDir tmp;
    auto cfgp = write_file(tmp.path, "bad.json",
                           R"({"geometry":{"kind":"sphere"},"epsilons":[]})");
    auto r = run_cli(tmp, "index --config " + cfgp.string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("config: epsilons must be non-empty") != std::string::npos);
}

TEST_CASE("offset beyond the focal bound is rejected") {
    TempDir tmp;
    auto cfgp = write_file(tmp.path, "cfg.json", kSphereConfig);
    auto r = run_cli(tmp, "index --config " + cfgp.string() + " --epsilons 2.0");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("exceeds") != std::string::npos);
}

TEST_CASE("index run succeeds and writes both formats") {
    TempDir tmp;
    auto cfgp = write_file(tmp.path, "cfg.json", kSphereConfig);
    auto out = tmp.path / "run1";
    auto r = run_cli(tmp, "index --config " + cfgp.string() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("index: wrote") != std::string::npos);
    CHECK(fs::exists(out / "index.csv"));
    CHECK(fs::exists(out / "index.json"));
    std::string csv = slurp(out / "index.csv");
    CHECK(csv.find("epsilon,index,ker_plus,ker_minus") == 0);
    CHECK(csv.find("\n0.20000000000000001,1,1,0\n") != std::string::npos);
}

TEST_CASE("non-decreasing epsilon list flags the expansion run") {
    TempDir tmp;
    auto cfgp = write_file(tmp.path, "cfg.json", kSphereConfig);
    auto out = tmp.path / "flagged";
    auto r = run_cli(tmp, "expansion --config " + cfgp.string() + " --out " + out.string() +
                              " --epsilons 0.2 0.1 0.1");
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("expansion:") != std::string::npos);
    CHECK(fs::exists(out / "expansion.json"));
}

TEST_CASE("reruns are byte-identical") {
    TempDir tmp;
    auto cfgp = write_file(tmp.path, "cfg.json", kSphereConfig);
    auto d1 = tmp.path / "d1", d2 = tmp.path / "d2";
    auto r1 = run_cli(tmp, "curvature --config " + cfgp.string() + " --out " + d1.string());
    auto r2 = run_cli(tmp, "curvature --config " + cfgp.string() + " --out " + d2.string());
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(d1 / "curvature.csv") == slurp(d2 / "curvature.csv"));
    CHECK(slurp(d1 / "curvature.json") == slurp(d2 / "curvature.json"));
    CHECK(!slurp(d1 / "curvature.csv").empty());
}

TEST_CASE("spectrum dump writes one matrix file per mode") {
    TempDir tmp;
    auto cfgp = write_file(tmp.path, "cfg.json", kSphereConfig);
    auto out = tmp.path / "spec", dump = tmp.path / "mats";
    auto r = run_cli(tmp, "spectrum --config " + cfgp.string() + " --out " + out.string() +
                              " --dump-matrix " + dump.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dump / "mode_0.5.txt"));
    CHECK(fs::exists(dump / "mode_-0.5.txt"));
    std::string body = slurp(dump / "mode_0.5.txt");
    std::string first = body.substr(0, body.find('\n'));
    CHECK(std::count(first.begin(), first.end(), ',') == 3);
}
