#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <fvgrad/cli.hpp>
#include <fvgrad/generators.hpp>
#include <fvgrad/mesh_io.hpp>

using namespace fvgrad;
namespace fs = std::filesystem;

namespace {

struct Run
{
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "fv_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("usage errors exit with 2")
{
    CHECK(run({"solve", "--no-such-flag"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"solve", "--case", "case9"}).code == 2);
    CHECK(run({"convergence", "--levels", "10,20"}).code == 2);
    CHECK(run({"convergence", "--levels", "20,10,40"}).code == 2);
    CHECK(run({"solve", "--alpha", "-1"}).code == 2);
    CHECK(run({"solve", "--mesh", "delaunay", "--jitter", "0.5"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--version"}).out.find("0.1.0") != std::string::npos);
}

TEST_CASE("convergence csv")
{
    const Run r = run({"convergence", "--case", "case1", "--mesh", "rect", "--levels", "10,20,40,80"});
    REQUIRE(r.code == 0);
    std::vector<std::string> data, eoc;
    for (const auto& l : lines(r.out)) {
        if (l.rfind("# eoc_", 0) == 0) eoc.push_back(l);
        else if (!l.empty() && l[0] != '#') data.push_back(l);
    }
    REQUIRE(data.size() == 5);
    CHECK(data[0] == "h,cells,theta,err_u_l2,err_grad_l2");
    CHECK(data[1].find(",100,") != std::string::npos);
    CHECK(data[4].find(",6400,") != std::string::npos);
    REQUIRE(eoc.size() == 2);
    CHECK(eoc[0].rfind("# eoc_u=", 0) == 0);
    CHECK(eoc[1].rfind("# eoc_grad=", 0) == 0);
    CHECK(std::stod(eoc[0].substr(8)) > 1.9);
    CHECK(lines(r.out).back() == eoc[1]);
    CHECK(r.out.find("# fv 0.1.0") == 0);
}

TEST_CASE("outputs are reproducible")
{
    const std::vector<std::string> args{"convergence", "--case", "case2", "--mesh", "delaunay", "--levels", "4,8,16",
                                        "--seed", "3", "--jitter", "0.1"};
    const Run a = run(args);
    const Run b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);

    const fs::path p = scratch("sweep.csv");
    const Run s = run({"alpha-sweep", "--case", "case1", "--n", "10", "--alpha-grid", "0.5,1,6", "--output", p.string()});
    CHECK(s.code == 0);
    CHECK(s.out.empty());
    const std::string first = slurp(p);
    CHECK(first.find("# argmin_u=") != std::string::npos);
    run({"alpha-sweep", "--case", "case1", "--n", "10", "--alpha-grid", "0.5,1,6", "--output", p.string()});
    CHECK(slurp(p) == first);
}

TEST_CASE("json output")
{
    const Run r = run({"solve", "--case", "case1", "--n", "4", "--format", "json"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"meta\"") != std::string::npos);
    CHECK(r.out.find("\"version\": \"0.1.0\"") != std::string::npos);
}

TEST_CASE("solve with matrix dump")
{
    const fs::path mm = scratch("a.mtx");
    const Run r = run({"solve", "--case", "case1", "--n", "5", "--dump-matrix", mm.string()});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    std::size_t rows = 0;
    bool header = false;
    for (const auto& l : ls) {
        if (l == "cell_id,x,y,u") header = true;
        else if (header && !l.empty() && l[0] != '#') ++rows;
    }
    CHECK(header);
    CHECK(rows == 25);
    const auto m = lines(slurp(mm));
    REQUIRE(!m.empty());
    CHECK(m[0] == "%%MatrixMarket matrix coordinate real symmetric");
    CHECK(m[1].rfind("% fv 0.1.0", 0) == 0);
}

TEST_CASE("mesh generation and checking")
{
    const fs::path good = scratch("good.json");
    CHECK(run({"mesh", "gen", "--mesh", "delaunay", "--n", "6", "--seed", "2", "--output", good.string()}).code == 0);
    CHECK(run({"mesh", "check", "--input", good.string()}).code == 0);

    const fs::path bad = scratch("bad.json");
    std::ofstream(bad) << R"({"dimension": 2, "vertices": [[0,0],[1,0],[0,1]], "cells": [{"vertices": [0,1,2]}]})";
    const Run r = run({"mesh", "check", "--input", bad.string()});
    CHECK(r.code == 1);
    CHECK(run({"solve", "--input", bad.string()}).code == 1);

    const fs::path broken = scratch("broken.json");
    std::ofstream(broken) << "{\n  \"dimension\": 2,\n  \"vertices\": [\n";
    const Run b = run({"mesh", "check", "--input", broken.string()});
    CHECK(b.code == 1);
    CHECK(b.err.find("line") != std::string::npos);
}

TEST_CASE("properties command")
{
    CHECK(run({"properties", "--n", "6", "--samples", "20"}).code == 0);
    CHECK(run({"properties", "--mesh", "delaunay", "--n", "5", "--seed", "1", "--samples", "20"}).code == 0);
}

TEST_CASE("thread count from the environment")
{
    ::setenv("FV_THREADS", "zero", 1);
    CHECK(run({"convergence", "--levels", "4,8,16"}).code == 2);
    ::setenv("FV_THREADS", "2", 1);
    const Run two = run({"convergence", "--levels", "4,8,16"});
    ::setenv("FV_THREADS", "1", 1);
    const Run one = run({"convergence", "--levels", "4,8,16"});
    ::unsetenv("FV_THREADS");
    CHECK(two.code == 0);
    CHECK(two.out == one.out);
}

TEST_CASE("process exit status")
{
    const std::string tool = FV_TOOL_PATH;
    auto status = [&](const std::string& args) {
        const int s = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("solve --n 4") == 0);
    CHECK(status("solve --bogus") == 2);
    CHECK(status("mesh check --input " + scratch("bad.json").string()) == 1);
}
