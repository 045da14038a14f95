#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "twospecies_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CmdResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path out = scratch_dir() / ("cmd" + std::to_string(counter) + ".out");
    fs::path err = scratch_dir() / ("cmd" + std::to_string(counter) + ".err");
    ++counter;
    std::string cmd = std::string(CLI_BIN_PATH) + " " + args + " >" + out.string() + " 2>" +
                      err.string();
    int rc = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

}  // namespace

TEST_CASE("help exits cleanly") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("simulate --help").code == 0);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("simulate --rho uniform:0,1 --eta uniform:2,3 --n 0 --t 1 --out x").code == 2);
    CHECK(run_cli("simulate --bogus-flag").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    // Grammar problems in a preset are usage errors too.
    fs::path dir = scratch_dir() / "bad_preset";
    CHECK(run_cli("simulate --rho uniform:1 --eta uniform:2,3 --n 2 --t 1 --out " + dir.string())
              .code == 2);
}

TEST_CASE("unreadable tabulated file exits with code 66") {
    fs::path dir = scratch_dir() / "no_cdf";
    auto r = run_cli("simulate --rho cdf:/nonexistent/f.txt --eta uniform:0,1 --n 2 --t 1 --out " +
                     dir.string());
    CHECK(r.code == 66);
}

TEST_CASE("simulate writes a run directory and a one-line summary") {
    fs::path dir = scratch_dir() / "headon";
    auto r = run_cli("simulate --rho uniform:-0.5,0.5 --eta uniform:0.5,1.5 --n 1 --t 2 --out " +
                     dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out == "events=1 final_energy=0 t_stationary=0.5\n");
    REQUIRE(fs::exists(dir / "trace.csv"));
    REQUIRE(fs::exists(dir / "trajectory.csv"));
    REQUIRE(fs::exists(dir / "config"));

    auto trajectory = slurp(dir / "trajectory.csv");
    CHECK(trajectory.rfind("t,species,index,position\n", 0) == 0);
    CHECK(trajectory.find("0,x,1,0.5\n") != std::string::npos);
    CHECK(trajectory.find("0,y,1,1.5\n") != std::string::npos);
    CHECK(trajectory.find("0.5,x,1,1\n") != std::string::npos);
    CHECK(trajectory.find("0.5,y,1,1\n") != std::string::npos);

    auto config = slurp(dir / "config");
    CHECK(config.find("subcommand=simulate\n") != std::string::npos);
    CHECK(config.find("n=1\n") != std::string::npos);

    auto trace = slurp(dir / "trace.csv");
    CHECK(trace.rfind("t,energy,self_x,self_y,cross,l2,l3,linf,a,b,events_cross,events_stick\n",
                      0) == 0);
}

TEST_CASE("simulate can sample the free flight") {
    fs::path dir = scratch_dir() / "sampled";
    auto r = run_cli("simulate --rho uniform:-0.5,0.5 --eta uniform:0.5,1.5 --n 1 --t 2 "
                     "--sample 0.25 --out " +
                     dir.string());
    REQUIRE(r.code == 0);
    auto trajectory = slurp(dir / "trajectory.csv");
    CHECK(trajectory.find("0.25,x,1,0.75\n") != std::string::npos);
    CHECK(trajectory.find("0.25,y,1,1.25\n") != std::string::npos);
}

TEST_CASE("census on paired data reports zero events") {
    fs::path dir = scratch_dir() / "census";
    auto r = run_cli("census --rho uniform:0,1 --eta uniform:0,1 --n-list 3,5 --t 1 --out " +
                     dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out == "runs=2 total_events=0\n");
    auto census = slurp(dir / "census.csv");
    CHECK(census.rfind("N,events,crossings,sticks,t_stationary\n", 0) == 0);
    CHECK(census.find("3,0,0,0,0.0\n") != std::string::npos);
    CHECK(census.find("5,0,0,0,0.0\n") != std::string::npos);
}

TEST_CASE("converge writes the study bundle") {
    fs::path dir = scratch_dir() / "study";
    auto r = run_cli("converge --rho uniform:0,1 --eta uniform:0,1 --n-list 4,8 --t 1 --out " +
                     dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("rates=3 ", 0) == 0);
    REQUIRE(fs::exists(dir / "rates.csv"));
    REQUIRE(fs::exists(dir / "trace_N4.csv"));
    REQUIRE(fs::exists(dir / "trace_N8.csv"));
    REQUIRE(fs::exists(dir / "census.csv"));
    auto rates = slurp(dir / "rates.csv");
    CHECK(rates.rfind("t,N,Wp_rho,Wp_eta,order_rho,order_eta\n", 0) == 0);
    // First data row: t=0, N=4, both distances 1/(4N) up to rounding, no
    // order yet.  The printed doubles carry rounding noise, so parse them.
    std::istringstream in(rates);
    std::string line;
    std::getline(in, line);
    REQUIRE(std::getline(in, line));
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double t = -1.0;
    int n = 0;
    double wr = 0.0, we = 0.0;
    std::string or_rho, or_eta;
    row >> t >> n >> wr >> we >> or_rho >> or_eta;
    CHECK(t == 0.0);
    CHECK(n == 4);
    CHECK(wr == Catch::Approx(0.0625));
    CHECK(we == Catch::Approx(0.0625));
    CHECK(or_rho == "nan");
    CHECK(or_eta == "nan");
}

TEST_CASE("converge output is deterministic") {
    fs::path d1 = scratch_dir() / "det1";
    fs::path d2 = scratch_dir() / "det2";
    std::string args = "converge --rho uniform:-2,-1 --eta uniform:1,2 --n-list 5,10 --t 4 --out ";
    REQUIRE(run_cli(args + d1.string()).code == 0);
    REQUIRE(run_cli(args + d2.string()).code == 0);
    CHECK(slurp(d1 / "rates.csv") == slurp(d2 / "rates.csv"));
    CHECK(slurp(d1 / "trace_N5.csv") == slurp(d2 / "trace_N5.csv"));
    CHECK(slurp(d1 / "census.csv") == slurp(d2 / "census.csv"));
}

TEST_CASE("mixture presets parse and run") {
    fs::path dir = scratch_dir() / "mixture";
    auto r = run_cli("simulate --rho mix:0.5*uniform:-2,-1+0.5*uniform:-0.5,0 "
                     "--eta uniform:1,2 --n 6 --t 3 --out " +
                     dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("events=", 0) == 0);
}

TEST_CASE("oracle comparison stays within the coarse tolerance") {
    auto r = run_cli("oracle-compare --rho uniform:-2.5,-1.5 --eta uniform:-0.5,0.5 --n 2 --t 1 "
                     "--delta 1e-3 --samples 4");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("sup_distance=", 0) == 0);
    double d = std::stod(r.out.substr(std::string("sup_distance=").size()));
    CHECK(d >= 0.0);
    CHECK(d <= 1e-2);
}
