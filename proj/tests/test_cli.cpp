#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "chaoslab/report.hpp"
#include "commands.hpp"

using namespace chaoslab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "chaoslab");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "chaoslab_test_cli";
  fs::create_directories(d);
  return d;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("canonical dump") {
  nlohmann::json j = {{"b", 1}, {"a", {{"z", 0.1}, {"y", 2.0}}}, {"c", {1.5, -0.0}}};
  j["d"] = std::numeric_limits<double>::infinity();
  const std::string s = canonical_dump(j);
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(s.find("\"y\"") < s.find("\"z\""));
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("2.0") != std::string::npos);
  CHECK(s.find("\"inf\"") != std::string::npos);
  CHECK(s.find("-0") == std::string::npos);
  CHECK(s.back() == '\n');
  CHECK(canonical_dump(nlohmann::json::parse(s)) == s);
}

TEST_CASE("report status roll-up") {
  Report r;
  r.command = "x";
  r.check_le("a", 1.0, 2.0);
  CHECK(r.to_json(false)["status"] == "pass");
  r.check_gt("b", std::nan(""), 0.0);
  CHECK(r.checks.back().status == Status::inconclusive);
  CHECK(r.to_json(false)["status"] == "inconclusive");
  r.check_true("c", false);
  CHECK(r.any_fail());
  CHECK(r.to_json(false)["status"] == "fail");
  r.checks[0].runtime = 0.5;
  CHECK_FALSE(r.to_json(false)["checks"][0].contains("runtime"));
  CHECK(r.to_json(true)["checks"][0]["runtime"] == 0.5);
}

TEST_CASE("seeds and workers") {
  CHECK(derive_seed(7, 0) == derive_seed(7, 0));
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
  std::vector<int> a(100), b(100);
  parallel_for(100, 1, [&](int i) { a[i] = i * i; });
  parallel_for(100, 4, [&](int i) { b[i] = i * i; });
  CHECK(a == b);
  CHECK_THROWS(parallel_for(10, 3, [](int i) {
    if (i == 5) throw std::runtime_error("boom");
  }));
  setenv("CHAOSLAB_WORKERS", "3", 1);
  CHECK(worker_count(1) == 3);
  setenv("CHAOSLAB_WORKERS", "zero", 1);
  CHECK(worker_count(2) == 2);
  unsetenv("CHAOSLAB_WORKERS");
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({"noncyclic", "--k", "two"}).code == 2);
  CHECK(run({"noncyclic", "--k", "0"}).code == 2);
  CHECK(run({"--help"}).code == 0);

  const std::string bad = write_file("bad.json", "[[0, 0], [1");
  Run r = run({"verify-winding", "--p", bad});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  const std::string bad2 = write_file("bad2.json", "[[0, 0], [1, \"x\"]]");
  r = run({"verify-winding", "--p", bad2});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  r = run({"verify-winding", "--p", (scratch_dir() / "missing.json").string()});
  CHECK(r.code == 2);

  r = run({"noncyclic", "--k", "2", "--degree", "6", "--trials", "10"});
  CHECK(r.code == 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["status"] == "pass");
  CHECK(j["command"] == "noncyclic");
  CHECK(j["schema_version"] == kReportSchemaVersion);
}

TEST_CASE("failing check gives exit code 1") {
  // No n <= 4 has three zeros in its region, so nothing verifies.
  const std::string p = write_file("one.json", "[[1, 0]]");
  const Run r = run({"verify-winding", "--p", p, "--m", "3", "--n-from", "2", "--n-to", "4"});
  CHECK(r.code == 1);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["checks"][0]["name"] == "some_n_verified");
  CHECK(j["checks"][0]["status"] == "fail");
}

TEST_CASE("reports are byte-stable and independent of the worker count") {
  const std::string a = (scratch_dir() / "a.json").string(), b = (scratch_dir() / "b.json").string();
  CHECK(run({"verify-vandermonde", "--n", "4", "--trials", "12", "--out", a}).code == 0);
  CHECK(run({"--workers", "3", "verify-vandermonde", "--n", "4", "--trials", "12", "--out", b}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(run({"verify-vandermonde", "--n", "4", "--trials", "12", "--seed", "8", "--out", b}).code == 0);
  CHECK(slurp(a) != slurp(b));
  const Run t = run({"verify-vandermonde", "--n", "3", "--trials", "4", "--timings"});
  CHECK(nlohmann::json::parse(t.out)["checks"][0].contains("runtime"));
}

TEST_CASE("quotient-norm and csv export") {
  const std::string xi = write_file("xi.json", "[[[0, 0], [1, 0]], [[0, 0], [2, 0]]]");
  const std::string p = write_file("z.json", "[[0, 0], [1, 0]]");
  const std::string q = write_file("q.json", "[[0, 0], [0, 0], [1, 0]]");
  Run r = run({"quotient-norm", "--xi", xi, "--p", p, "--constraint", "zn:2", "--degree", "8"});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["data"]["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
  r = run({"quotient-norm", "--xi", xi, "--p", p, "--constraint", "divisor:" + q, "--encoding", "residues"});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["data"]["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(run({"quotient-norm", "--xi", xi, "--p", p, "--constraint", "zn:x"}).code == 2);

  const std::string csv = (scratch_dir() / "qn.csv").string();
  r = run({"quasinilpotence-probe", "--N", "4", "--csv", csv});
  CHECK(r.code == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("n,value,root\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  CHECK(run({"noncyclic", "--trials", "2", "--csv", csv}).code == 2);
}
