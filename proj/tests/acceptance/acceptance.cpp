// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "wedgepower/wedgepower.hpp"

using namespace wedgepower;

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
};

double r3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::string num(double v, int decimals = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(decimals);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Scenario preset(const char* name) { return find_preset(name).value(); }

void ac1(Check& c) {
  struct Case {
    std::string label;
    std::function<DesignEffectResult()> fn;
    double de;
    double r;  // negative: no r expected
  };
  const std::vector<Case> cases = {
      {"de_simple(6,0.1)", [] { return de_simple(6, 0.1); }, 1.500, -1},
      {"de_simple(10,0.1)", [] { return de_simple(10, 0.1); }, 1.900, -1},
      {"de_ancova_prepost(10,0.1,0.4,0)", [] { return de_ancova_prepost(10, 0.1, 0.4, 0); }, 1.816, -1},
      {"de_ancova_prepost(10,0.1,1,0)", [] { return de_ancova_prepost(10, 0.1, 1, 0); }, 1.373, -1},
      {"de_ancova_prepost(10,0.1,0.4,0.6)", [] { return de_ancova_prepost(10, 0.1, 0.4, 0.6); }, 1.435, 0.495},
      {"de_stepped_wedge(2,1,1,5,0.1)", [] { return de_stepped_wedge(2, 1, 1, 5, 0.1); }, 1.137, -1},
      {"de_three_measurement(5,0.1,0.4,0.6)", [] { return de_three_measurement(5, 0.1, 0.4, 0.6); }, 0.888, 0.529},
  };
  double worst_ms = 0.0;
  for (const auto& k : cases) {
    const auto t0 = Clock::now();
    const auto res = k.fn();
    worst_ms = std::max(worst_ms, 1e3 * seconds_since(t0));
    c.expect(std::fabs(r3(res.de) - k.de) <= 0.001 + 1e-12, k.label + " = " + num(res.de, 4));
    if (k.r >= 0) c.expect(res.r && std::fabs(r3(*res.r) - k.r) <= 0.001 + 1e-12, k.label + " r");
  }
  c.expect(worst_ms < 1.0, "slowest call " + num(worst_ms, 3) + " ms");
  c.detail = "7 design effects, slowest " + num(worst_ms, 4) + " ms";
}

void ac2(Check& c) {
  struct Case {
    std::string label;
    SamplePlan plan;
    double want;
    long rounded;  // 0: no rounding target
  };
  const std::vector<Case> cases = {
      {"34 x 1.5", inflate_sample_size(34, de_simple(6, 0.1).de), 51.0, 0},
      {"128 x 1.816", inflate_sample_size(128, de_ancova_prepost(10, 0.1, 0.4, 0).de), 232.4, 0},
      {"128 x 1.435", inflate_sample_size(128, de_ancova_prepost(10, 0.1, 0.4, 0.6).de), 183.67, 0},
      {"34 x 1.137 x 3", inflate_sample_size(34, de_stepped_wedge(2, 1, 1, 5, 0.1).de, 3), 116.0, 116},
      {"34 x 0.888 x 3", inflate_sample_size(34, de_three_measurement(5, 0.1, 0.4, 0.6).de, 3), 90.6, 0},
  };
  std::string shown;
  for (const auto& k : cases) {
    const double got = k.rounded ? static_cast<double>(k.plan.n_rounded) : k.plan.n_required;
    const double tol = k.rounded ? 0.0 : 0.05;
    c.expect(std::fabs(got - k.want) <= tol + 1e-9, k.label + " = " + num(k.plan.n_required, 3));
    shown += (shown.empty() ? "" : ", ") + num(got, k.rounded ? 0 : 2);
  }
  c.detail = shown;
}

BlockCovariance first_block(const char* name) {
  const auto s = preset(name);
  return build_cluster_v(s.design, derive_components(s.correlation, family_of(s.design.kind)));
}

bool matches(const Eigen::MatrixXd& m, const std::function<double(int, int)>& want, int rows, int cols) {
  if (m.rows() < rows || m.cols() < cols) return false;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (std::fabs(std::round(m(i, j) * 10.0) / 10.0 - want(i, j)) > 1e-9) return false;
    }
  }
  return true;
}

void ac3(Check& c) {
  const auto t0 = Clock::now();
  const auto e2 = first_block("example2");
  c.expect(e2.cluster_matrix.rows() == 6 &&
               matches(e2.cluster_matrix, [](int i, int j) { return i == j ? 25.0 : 2.5; }, 6, 6),
           "example2 V");
  c.expect(matches(vcorr(e2), [](int i, int j) { return i == j ? 1.0 : 0.1; }, 6, 6), "example2 VCORR");

  const auto e4 = first_block("example4");
  c.expect(matches(e4.a_block, [](int i, int j) { return i == j ? 25.0 : 2.5; }, 10, 10), "example4 A");
  c.expect(matches(e4.b_block, [](int, int) { return 1.0; }, 10, 10), "example4 B");

  const auto e5 = first_block("example5");
  c.expect(matches(e5.cluster_matrix,
                   [](int i, int j) {
                     const bool subj = i / 2 == j / 2, time = i % 2 == j % 2;
                     return subj ? (time ? 25.0 : 14.5) : (time ? 2.5 : 1.0);
                   },
                   10, 10),
           "example5 excerpt");

  const auto e7 = first_block("example7");
  c.expect(e7.cluster_matrix.rows() == 15, "example7 dimension");
  c.expect(matches(e7.cluster_matrix,
                   [](int i, int j) {
                     const bool subj = i / 3 == j / 3, time = i % 3 == j % 3;
                     return subj ? (time ? 25.0 : 14.5) : (time ? 2.5 : 1.0);
                   },
                   9, 9),
           "example7 excerpt");
  const double ms = 1e3 * seconds_since(t0);
  c.expect(ms < 10.0, "runtime " + num(ms, 2) + " ms");
  c.detail = "V/VCORR/A/B and excerpts, " + num(ms, 2) + " ms";
}

void ac4(Check& c) {
  struct Target {
    const char* preset;
    double target;
    const char* note;
  };
  const Target targets[] = {
      {"example1", 0.807, ""},
      {"example2", 0.831, ""},
      {"example2-8x6", 0.788, ""},
      {"example2-n51", 0.803, ""},
      {"example3", 0.801, ""},
      {"example3-n124", 0.789, " (unclustered reference, N=124)"},
      {"example4", 0.813, ""},
      {"example5", 0.830, ""},
      {"example6", 0.836, ""},
      {"example7", 0.819, ""},
  };
  const auto t0 = Clock::now();
  std::string shown;
  for (const auto& t : targets) {
    auto s = preset(t.preset);
    std::optional<DdfPolicy> policy = s.ddf_policy;
    if (std::string(t.preset) == "example3-n124") {
      s.correlation.icc = 0.0;
      policy = DdfPolicy::residual;
    }
    const double p = analytic_power(s.design, s.correlation, policy).result.power;
    c.expect(std::fabs(p - t.target) <= 0.005, std::string(t.preset) + " = " + num(p, 4) + " vs " + num(t.target) + t.note);
    shown += (shown.empty() ? "" : " ") + num(p);
  }
  const double sec = seconds_since(t0);
  c.expect(sec < 1.0, "runtime " + num(sec, 3) + " s");
  c.detail = shown + " in " + num(sec, 3) + " s";
}

SimulationPlan mc_plan(const Scenario& s, std::uint64_t seed) {
  SimulationPlan p;
  p.spec = s.design;
  p.params = s.correlation;
  p.policy = s.ddf_policy;
  p.replicates = 20000;
  p.seed = seed;
  return p;
}

void ac5(Check& c) {
  const auto t0 = Clock::now();
  std::uint64_t seed = 5000;
  double worst_z = 0.0;
  for (const auto& base : presets()) {
    const auto s = with_null_means(base);
    const double alpha = s.design.alpha;
    const double p = analytic_power(s.design, s.correlation, s.ddf_policy).result.power;
    c.expect(std::fabs(p - alpha) <= 1e-9, s.name + " analytic " + num(p, 12));
    const auto e = empirical_power(mc_plan(s, ++seed));
    const double se = std::sqrt(alpha * (1 - alpha) / 20000.0);
    const double z = (e.estimate - alpha) / se;
    worst_z = std::max(worst_z, std::fabs(z));
    c.expect(std::fabs(z) <= 3.0, s.name + " MC " + num(e.estimate, 4) + " (" + num(z, 2) + " se)");
  }
  const double sec = seconds_since(t0);
  c.expect(sec < 120.0, "runtime " + num(sec, 1) + " s");
  c.detail = std::to_string(presets().size()) + " null scenarios, worst |z| " + num(worst_z, 2) + ", " + num(sec, 1) +
             " s";
}

void ac6(Check& c) {
  const auto t0 = Clock::now();
  std::uint64_t seed = 6000;
  double worst_z = 0.0;
  std::string shown;
  for (const char* name : {"example1", "example2", "example3", "example4", "example5", "example6", "example7"}) {
    const auto s = preset(name);
    const double p = analytic_power(s.design, s.correlation, s.ddf_policy).result.power;
    const auto e = empirical_power(mc_plan(s, ++seed));
    const double se = std::sqrt(p * (1 - p) / 20000.0);
    const double z = (e.estimate - p) / se;
    worst_z = std::max(worst_z, std::fabs(z));
    c.expect(std::fabs(z) <= 3.0, std::string(name) + " MC " + num(e.estimate, 4) + " vs " + num(p, 4));
    shown += (shown.empty() ? "" : " ") + num(e.estimate);
  }
  const double sec = seconds_since(t0);
  c.expect(sec < 300.0, "runtime " + num(sec, 1) + " s");
  c.detail = shown + "; worst |z| " + num(worst_z, 2) + ", " + num(sec, 1) + " s";
}

void ac7(Check& c) {
  int checks = 0;
  // Distribution round trips and the lambda = 0 reduction.
  for (int ndf : {1, 2, 5}) {
    for (int ddf : {3, 32, 226}) {
      for (double p : {0.01, 0.5, 0.95, 0.999}) {
        const double x = central_f_quantile(p, ndf, ddf);
        c.expect(std::fabs(central_f_cdf(x, ndf, ddf) - p) <= 1e-9, "round trip");
        c.expect(std::fabs(noncentral_f_cdf(x, ndf, ddf, 0.0) - p) <= 1e-10, "lambda 0 reduction");
        checks += 2;
      }
    }
  }
  // Component identities.
  for (double icc : {0.0, 0.1, 0.5}) {
    for (double cac : {0.0, 0.4, 1.0}) {
      for (double sac : {0.0, 0.6, 1.0}) {
        const auto k = derive_components({25.0, icc, cac, sac}, Family::cohort);
        c.expect(std::fabs(k.total() - 25.0) <= 1e-12, "component sum");
        c.expect(std::fabs((k.sigma_c_sq + k.sigma_ct_sq) / 25.0 - icc) <= 1e-12, "icc recovery");
        if (icc > 0) c.expect(std::fabs(k.sigma_c_sq / (k.sigma_c_sq + k.sigma_ct_sq) - cac) <= 1e-12, "cac recovery");
        checks += 3;
      }
    }
  }
  // PSD of every preset block.
  for (const auto& s : presets()) {
    const auto v = assemble_study_v(s.design, derive_components(s.correlation, family_of(s.design.kind)));
    for (const auto& b : v.blocks) c.expect(min_eigenvalue(b.cluster_matrix) > -1e-10, s.name + " PSD");
    ++checks;
  }
  // Coding invariance: flip arm and time reference levels.
  for (const char* name : {"example4", "example5"}) {
    const auto s = preset(name);
    const auto data = exemplary_dataset(s.design);
    const auto v = assemble_study_v(s.design, derive_components(s.correlation, family_of(s.design.kind)));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.rows.size()), 4);
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      const double a = 1.0 - data.rows[i].arm, t = data.rows[i].time == 1 ? 1.0 : 0.0;
      x.row(static_cast<Eigen::Index>(i)) << 1.0, a, t, a * t;
    }
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(1, 4);
    l(0, 3) = 1.0;
    const GlsOperator gls(x, v);
    const double f = WaldStatistic(l, gls.beta_covariance()).fvalue(gls.fit(data.mean_vector()));
    const double base = analytic_power(s.design, s.correlation).result.fvalue;
    c.expect(std::fabs(f - base) <= 1e-10 * base, std::string(name) + " coding invariance");
    ++checks;
  }
  // Three-measurement and stepped wedge design effects coincide at cac = 1, sac = 0.
  for (double n : {2.0, 5.0, 30.0}) {
    for (double icc : {0.01, 0.1, 0.4}) {
      c.expect(std::fabs(de_stepped_wedge(2, 1, 1, n, icc).de - de_three_measurement(n, icc, 1.0, 0.0).de) <= 1e-12,
               "de Hoop / Woertman equivalence");
      ++checks;
    }
  }
  // Monotone power in the number of clusters.
  auto s = preset("example2");
  double last = 0.0;
  for (int per_arm = 2; per_arm < 22; ++per_arm) {
    s.design.clusters_per_arm = {per_arm, per_arm};
    const double p = analytic_power(s.design, s.correlation).result.power;
    c.expect(p > last, "monotone at " + std::to_string(per_arm) + " clusters per arm");
    last = p;
  }
  ++checks;
  c.detail = std::to_string(checks) + " property checks";
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    void (*fn)(Check&);
  };
  const Criterion criteria[] = {
      {"AC1", "design effects", ac1},        {"AC2", "sample plans", ac2},
      {"AC3", "covariance reproduction", ac3}, {"AC4", "analytic power", ac4},
      {"AC5", "null calibration", ac5},      {"AC6", "Monte Carlo agreement", ac6},
      {"AC7", "property suites", ac7},
  };
  int failed = 0;
  for (const auto& k : criteria) {
    Check c;
    try {
      k.fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    std::printf("%s %s: %s — %s\n", k.id, c.ok ? "PASS" : "FAIL", k.title, c.detail.c_str());
    for (const auto& f : c.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    failed += c.ok ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
