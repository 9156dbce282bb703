#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wedgepower/design.hpp"
#include "wedgepower/presets.hpp"

using namespace wedgepower;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(WEDGEPOWER_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_path(const std::string& name) { return std::string(WEDGEPOWER_TEST_TMP) + "/" + name; }

std::string write_file(const std::string& name, const std::string& text) {
  const std::string path = temp_path(name);
  std::ofstream(path) << text;
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

bool has(const std::string& haystack, const std::string& needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("de prints the design effect and the sample plan") {
  auto r = run("de --preset example4 --n-unclustered 128");
  CHECK(r.code == 0);
  CHECK(has(r.out, "DE=1.816"));
  CHECK(has(r.out, "232.4"));

  r = run("de --preset example6 --n-unclustered 34");
  CHECK(r.code == 0);
  CHECK(has(r.out, "DE=1.137"));
  CHECK(has(r.out, "116"));

  r = run("de --preset example5 --n-unclustered 128");
  CHECK(has(r.out, "DE=1.435"));
  CHECK(has(r.out, "r 0.495"));
  CHECK(has(r.out, "183.7"));

  const auto spec = write_file("rho0.json", R"({"design": {"kind": "crt_post", "clusters_per_arm": [3, 3],
      "cluster_size": 8, "means": [59, 54]}, "correlation": {"icc": 0}})");
  r = run("de --spec " + spec);
  CHECK(r.code == 0);
  CHECK(has(r.out, "DE=1.000"));

  r = run("de --preset example7 --n-unclustered 34 --format json");
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["plan"]["n_required"].get<double>() == doctest::Approx(90.6).epsilon(1e-3));
}

TEST_CASE("power prints the intermediates") {
  auto r = run("power --preset example2");
  CHECK(r.code == 0);
  CHECK(has(r.out, "power        0.831"));
  CHECK(has(r.out, "ddf          45"));
  CHECK(has(run("power --preset example4").out, "power        0.813"));

  const auto null = write_file("null.json", R"({"design": {"kind": "crt_post", "clusters_per_arm": [5, 4],
      "cluster_size": 6, "means": [54, 54]}, "correlation": {"icc": 0.1}})");
  CHECK(has(run("power --spec " + null).out, "power        0.050"));

  r = run("power --preset example5 --audit");
  CHECK(has(r.out, "arm:time"));
  CHECK(has(r.out, "beta:"));

  const auto j = nlohmann::json::parse(run("power --preset example7 --format json").out);
  CHECK(j["ddf"] == 81);
  CHECK(j["power"].get<double>() == doctest::Approx(0.8189).epsilon(1e-3));
  CHECK(count_lines(run("power --preset example1 --format csv").out) == 2);

  CHECK(has(run("power --preset example4 --ddf-policy residual").out, "ddf          236"));
}

TEST_CASE("mc agrees with the analytic value and is reproducible") {
  const auto a = run("mc --preset example1 --reps 20000 --seed 42 --format json");
  CHECK(a.code == 0);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(std::fabs(j["estimate"].get<double>() - 0.807) <= 0.011);
  CHECK(run("mc --preset example1 --reps 20000 --seed 42 --format json").out == a.out);

  const auto one = nlohmann::json::parse(run("mc --preset example3 --reps 1 --format json").out);
  const double e = one["estimate"].get<double>();
  CHECK((e == 0.0 || e == 1.0));
  CHECK(run("mc --preset example1 --reps 0").code != 0);
}

TEST_CASE("dataset export") {
  CHECK(count_lines(run("dataset --preset example6").out) == 121);
  CHECK(count_lines(run("dataset --preset example1").out) == 35);

  const std::string path = temp_path("example5.csv");
  CHECK(run("dataset --preset example5 --out " + path).code == 0);
  const auto back = dataset_from_csv(read_file(path));
  const auto want = exemplary_dataset(find_preset("example5")->design);
  REQUIRE(back.rows.size() == want.rows.size());
  for (std::size_t i = 0; i < want.rows.size(); ++i) {
    CHECK(back.rows[i].subject_id == want.rows[i].subject_id);
    CHECK(back.rows[i].mean == want.rows[i].mean);
  }
  CHECK(run("dataset --preset example5 --out /nonexistent-dir/x.csv").code != 0);
}

TEST_CASE("vmatrix dumps") {
  auto r = run("vmatrix --preset example2");
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 6);
  CHECK(r.out.rfind("25.0\t2.5\t2.5\t2.5\t2.5\t2.5\n2.5\t25.0", 0) == 0);
  r = run("vmatrix --preset example2 --correlation");
  CHECK(r.out.rfind("1.0\t0.1\t0.1", 0) == 0);
  r = run("vmatrix --preset example7 --cluster-index 6");
  CHECK(count_lines(r.out) == 15);
  CHECK(r.out.rfind("25.0\t14.5\t14.5\t2.5\t1.0\t1.0\t2.5", 0) == 0);
  CHECK(run("vmatrix --preset example7 --cluster-index 7").code != 0);
  CHECK(run("vmatrix --preset example7 --cluster-index 0").code != 0);
  CHECK(has(run("vmatrix --preset example2 --format csv").out, "25,2.5"));
}

TEST_CASE("bad input exits nonzero") {
  CHECK(run("power --preset nope").code != 0);
  CHECK(run("power").code != 0);
  const auto bad = write_file("bad.json", R"({"design": {"kind": "swd_xsec", "steps_k": 2, "baseline_b": 1,
      "per_step_t": 1, "clusters_per_step": [4], "cluster_size": 5, "means": [54, 59]}})");
  CHECK(run("power --spec " + bad).code != 0);
  CHECK(run("frobnicate").code != 0);
}
