#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "exclusim/error.hpp"
#include "exclusim/experiment.hpp"
#include "exclusim/io.hpp"
#include "exclusim/stats.hpp"

using namespace exclusim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("exclusim_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("git blob hash") {
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  }

  TEST_CASE("double formatting round-trips") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 3) == "0.3333333333333333");
    CHECK(std::stod(format_double(2.0 / 3)) == 2.0 / 3);
  }

  TEST_CASE("csv quoting and line endings") {
    CsvTable t({"a", "b"});
    t.add_row({"1", "x,y"});
    t.add_row({"2", "say \"hi\""});
    CHECK(t.str() == "a,b\n1,\"x,y\"\n2,\"say \"\"hi\"\"\"\n");
    CHECK_THROWS(t.add_row({"only one"}));
  }

  TEST_CASE("atomic write") {
    const auto dir = scratch("io");
    write_atomic(dir / "f.txt", "one");
    write_atomic(dir / "f.txt", "two");
    CHECK(read_file(dir / "f.txt") == "two");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
  }
}

TEST_SUITE("stats") {
  TEST_CASE("slope of an exact power law") {
    const double t[] = {8, 16, 32, 64}, v[] = {0.5, 0.25, 0.125, 0.0625}, se[] = {0.01, 0.01, 0.01, 0.01};
    const auto f = fit_slope(t, v, se);
    CHECK(f.slope == doctest::Approx(-1.0));
    CHECK(f.half_width < 1e-9);
    CHECK(f.weighted);
    const double zero[] = {0, 0, 0, 0};
    CHECK_FALSE(fit_slope(t, v, zero).weighted);
    const double two[] = {1, 2};
    CHECK_THROWS_AS(fit_slope(two, two, two), InvalidArgument);
  }

  TEST_CASE("slope confidence interval uses Student t") {
    const double t[] = {1, 2, 4}, v[] = {1.0, 0.6, 0.24}, se[] = {0, 0, 0};
    const auto f = fit_slope(t, v, se);
    // One degree of freedom: t_{0.975} = 12.706.
    const double x[] = {0, std::log(2.0), std::log(4.0)};
    const double y[] = {0, std::log(0.6), std::log(0.24)};
    const auto lf = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(lf.slope));
    double rss = 0, mx = (x[0] + x[1] + x[2]) / 3, sxx = 0;
    for (int i = 0; i < 3; ++i) {
      const double r = y[i] - lf.intercept - lf.slope * x[i];
      rss += r * r;
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    CHECK(f.half_width == doctest::Approx(12.706204736 * std::sqrt(rss / sxx)).epsilon(1e-8));
  }

  TEST_CASE("accumulator merge equals a single pass") {
    Accumulator a, b, all;
    for (int i = 0; i < 100; ++i) {
      const double v = std::sin(i);
      (i < 37 ? a : b).add(v);
      all.add(v);
    }
    a.merge(b);
    CHECK(a.count() == all.count());
    CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-14));
    CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
  }
}

TEST_SUITE("cli") {
  TEST_CASE("parse errors name the field and line") {
    try {
      run_experiment("{\n  \"kind\": \"gap\",\n  \"rho\": 1.5\n}", "bad");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.field() == "rho");
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(run_experiment(R"({"kind": "gap", "colour": 1})", "x"), ParseError);
    CHECK_THROWS_AS(run_experiment(R"({"kind": "teleport"})", "x"), ParseError);
    CHECK_THROWS_AS(run_experiment("{\"kind\": ", "x"), ParseError);
    CHECK_THROWS_AS(run_experiment(R"({"kind": "kernel", "t": "soon"})", "x"), ParseError);
  }

  TEST_CASE("module preconditions surface as errors") {
    const auto dir = scratch("pre");
    RunOptions o;
    o.out_dir = dir;
    // Two particles on a path cannot pass, so the tagged sector splits.
    CHECK_THROWS_AS(
        run_experiment(R"({"kind": "gap", "d": 1, "ells": [2], "rho": 0.5, "modes": ["tagged"]})", "g", o),
        Disconnected);
    // 8 < 4 sqrt(16) is caught while reading the file.
    CHECK_THROWS_AS(run_experiment(R"({"kind": "kernel", "n": 8, "t": 16})", "k", o), ParseError);
  }

  TEST_CASE("gap experiment writes csv and sidecar") {
    const auto dir = scratch("gap");
    RunOptions o;
    o.out_dir = dir;
    const auto r = run_experiment(R"({"kind": "gap", "d": 1, "ells": [1, 2, 3], "rho": "1/3", "modes": ["kawasaki"]})",
                                  "g", o);
    CHECK(r.exit_code == 0);
    const auto csv = read_file(r.csv);
    CHECK(csv.rfind("ell,rho,mode,lambda1,lambda1_ell2,states,solver,residual,iterations\n", 0) == 0);
    const auto side = nlohmann::json::parse(read_file(r.sidecar));
    CHECK(side["schema"] == sidecar_schema);
    CHECK(side["outputs"][0]["git_blob"] == git_blob_hash(csv));
    CHECK(side["passed"] == true);
  }

  TEST_CASE("re-running a sidecar reproduces the bytes") {
    const auto dir = scratch("rerun");
    RunOptions o;
    o.out_dir = dir / "a";
    fs::create_directories(*o.out_dir);
    const auto first = run_experiment(
        R"({"kind": "kernel", "n": 8, "t": 2, "samples": 3000, "batch": 1000, "seed": 17})", "k", o);
    RunOptions again;
    again.out_dir = dir / "b";
    fs::create_directories(*again.out_dir);
    const auto second = run_experiment_file(first.sidecar, again);
    CHECK(read_file(first.csv) == read_file(second.csv));
    CHECK(read_file(first.sidecar) == read_file(second.sidecar));
    // The worker count does not enter the results.
    RunOptions wide = again;
    wide.workers = 3;
    wide.out_dir = dir / "c";
    fs::create_directories(*wide.out_dir);
    const auto third = run_experiment_file(first.sidecar, wide);
    CHECK(read_file(first.csv) == read_file(third.csv));
  }
}
