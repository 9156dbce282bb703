// wedgepower: design effects, analytic power, Monte Carlo checks, exemplary
// datasets and covariance dumps for CRT and stepped wedge designs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wedgepower/wedgepower.hpp"

namespace wp = wedgepower;
using nlohmann::json;

namespace {

struct Options {
  std::string spec_file;
  std::string preset;
  std::optional<double> alpha;
  std::string ddf_policy;
  std::string format = "table";
  std::string out;
  bool audit = false;
  long reps = 1000;
  std::uint64_t seed = 1;
  std::optional<double> n_unclustered;
  int cluster_index = 1;
  bool correlation = false;
};

std::string fixed(double v, int decimals) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(decimals) << v;
  return s.str();
}

std::string full(double v) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return s.str();
}

wp::Scenario load_scenario(const Options& opt) {
  if (opt.spec_file.empty() == opt.preset.empty()) {
    throw std::runtime_error("give exactly one of --spec FILE or --preset NAME");
  }
  wp::Scenario s;
  if (!opt.preset.empty()) {
    auto found = wp::find_preset(opt.preset);
    if (!found) {
      std::string names;
      for (const auto& p : wp::presets()) names += (names.empty() ? "" : ", ") + p.name;
      throw std::runtime_error("unknown preset '" + opt.preset + "' (available: " + names + ")");
    }
    s = *found;
  } else {
    s = wp::load_spec_file(opt.spec_file);
  }
  if (opt.alpha) s.design.alpha = *opt.alpha;
  if (!opt.ddf_policy.empty()) {
    auto policy = wp::parse_ddf_policy(opt.ddf_policy);
    if (!policy) throw std::runtime_error("unknown ddf policy '" + opt.ddf_policy + "'");
    s.ddf_policy = policy;
  }
  wp::require_valid(s.design);
  auto issues = wp::validate_params(s.correlation, wp::family_of(s.design.kind));
  if (!issues.empty()) throw wp::ValidationError(std::move(issues));
  return s;
}

// Writes to --out when given, stdout otherwise.
void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(opt.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + opt.out + "' for writing");
  file << text;
  if (!file.flush()) throw std::runtime_error("write to '" + opt.out + "' failed");
}

// ---- de ----

struct NamedEffect {
  std::string method;
  wp::DesignEffectResult result;
};

struct DeReport {
  std::vector<NamedEffect> effects;  // first entry drives the sample plan
  int multiplier = 1;                // measurement periods per participant slot
  int plan_cluster_size = 1;         // observations contributed by one cluster
  int plan_arms = 2;
};

DeReport design_effects_for(const wp::Scenario& s) {
  const auto& d = s.design;
  const auto& c = s.correlation;
  DeReport r;
  switch (d.kind) {
    case wp::DesignKind::rct_post:
    case wp::DesignKind::rct_prepost:
      r.effects.push_back({"individual randomization", wp::de_simple(1.0, c.icc)});
      r.plan_cluster_size = d.kind == wp::DesignKind::rct_post ? 1 : 2;
      break;
    case wp::DesignKind::crt_post:
      r.effects.push_back({"1 + (m - 1) rho", wp::de_simple(d.mean_cluster_size(), c.icc)});
      r.plan_cluster_size = static_cast<int>(std::lround(d.mean_cluster_size()));
      break;
    case wp::DesignKind::crt_prepost_xsec:
      r.effects.push_back({"ANCOVA, cross-sectional", wp::de_ancova_prepost(d.mean_cluster_size(), c.icc, c.cac, 0.0)});
      r.plan_cluster_size = 2 * static_cast<int>(std::lround(d.mean_cluster_size()));
      break;
    case wp::DesignKind::crt_prepost_cohort:
      r.effects.push_back({"ANCOVA, cohort", wp::de_ancova_prepost(d.mean_cluster_size(), c.icc, c.cac, c.sac)});
      r.plan_cluster_size = 2 * static_cast<int>(std::lround(d.mean_cluster_size()));
      break;
    case wp::DesignKind::swd_xsec:
    case wp::DesignKind::swd_cohort: {
      const double n = d.mean_cluster_size();
      const bool three = d.steps_k == 2 && d.baseline_b == 1 && d.per_step_t == 1;
      if (d.kind == wp::DesignKind::swd_xsec) {
        r.effects.push_back({"stepped wedge (Woertman)", wp::de_stepped_wedge(d.steps_k, d.baseline_b, d.per_step_t, n, c.icc)});
        if (three) r.effects.push_back({"three measurements (de Hoop)", wp::de_three_measurement(n, c.icc, c.cac, 0.0)});
      } else {
        if (!three) throw std::runtime_error("cohort stepped wedge design effect needs steps_k = 2, baseline_b = 1, per_step_t = 1");
        r.effects.push_back({"three measurements (de Hoop)", wp::de_three_measurement(n, c.icc, c.cac, c.sac)});
      }
      r.multiplier = d.times();
      r.plan_cluster_size = static_cast<int>(std::lround(n)) * d.times();
      r.plan_arms = d.steps_k;
      break;
    }
  }
  return r;
}

int cmd_de(const Options& opt) {
  const auto s = load_scenario(opt);
  const DeReport r = design_effects_for(s);
  const auto& primary = r.effects.front().result;
  std::optional<wp::SamplePlan> plan;
  if (opt.n_unclustered) {
    plan = wp::inflate_sample_size(*opt.n_unclustered, primary.de, r.multiplier, r.plan_cluster_size, r.plan_arms);
  }

  std::ostringstream out;
  if (opt.format == "json") {
    json j;
    j["scenario"] = s.name;
    j["design"] = std::string(wp::to_string(s.design.kind));
    for (const auto& e : r.effects) {
      json item{{"method", e.method},
                {"de", e.result.de},
                {"clustering_factor", e.result.clustering_factor},
                {"repeated_factor", e.result.repeated_factor}};
      if (e.result.r) item["r"] = *e.result.r;
      j["design_effects"].push_back(item);
    }
    if (plan) {
      j["plan"] = {{"n_unclustered", plan->n_unclustered}, {"de", plan->de},
                   {"participants", plan->participants}, {"observations_multiplier", plan->observations_multiplier},
                   {"n_required", plan->n_required}, {"n_rounded", plan->n_rounded}, {"note", plan->plan_note}};
    }
    out << j.dump(2) << "\n";
  } else if (opt.format == "csv") {
    out << "method,de,clustering_factor,repeated_factor,r\n";
    for (const auto& e : r.effects) {
      out << '"' << e.method << "\"," << full(e.result.de) << ',' << full(e.result.clustering_factor) << ','
          << full(e.result.repeated_factor) << ',' << (e.result.r ? full(*e.result.r) : "") << "\n";
    }
  } else {
    out << "DE=" << fixed(primary.de, 3) << "  [" << r.effects.front().method << "]\n";
    for (const auto& e : r.effects) {
      out << "  " << e.method << ": de " << fixed(e.result.de, 3) << " = clustering "
          << fixed(e.result.clustering_factor, 3) << " x repeated " << fixed(e.result.repeated_factor, 3);
      if (e.result.r) out << ", r " << fixed(*e.result.r, 3);
      out << "\n";
    }
    if (plan) {
      out << "plan: " << fixed(plan->n_unclustered, 0) << " x " << fixed(plan->de, 3);
      if (plan->observations_multiplier > 1) out << " x " << plan->observations_multiplier;
      out << " = " << fixed(plan->n_required, 1) << " (round up: " << plan->n_rounded << ")\n";
      out << "  " << plan->plan_note << "\n";
    }
  }
  emit(opt, out.str());
  return 0;
}

// ---- power ----

int cmd_power(const Options& opt) {
  const auto s = load_scenario(opt);
  const auto rep = wp::analytic_power(s.design, s.correlation, s.ddf_policy);
  const auto& p = rep.result;

  std::ostringstream out;
  if (opt.format == "json") {
    json j{{"scenario", s.name},
           {"design", std::string(wp::to_string(s.design.kind))},
           {"observations", rep.observations},
           {"fvalue", p.fvalue},
           {"ndf", p.ndf},
           {"ddf", p.ddf},
           {"lambda", p.lambda},
           {"fcrit", p.fcrit},
           {"alpha", p.alpha},
           {"power", p.power},
           {"ddf_policy", std::string(wp::to_string(rep.ddf_policy))},
           {"ddf_rule", rep.ddf.rule},
           {"warnings", rep.warnings}};
    if (opt.audit) {
      for (std::size_t i = 0; i < rep.column_names.size(); ++i) {
        j["beta"][rep.column_names[i]] = rep.beta(static_cast<Eigen::Index>(i));
      }
      std::vector<std::vector<double>> l;
      for (Eigen::Index r = 0; r < rep.contrast.l.rows(); ++r) {
        l.emplace_back();
        for (Eigen::Index c = 0; c < rep.contrast.l.cols(); ++c) l.back().push_back(rep.contrast.l(r, c));
      }
      j["contrast"] = {{"label", rep.contrast.label}, {"L", l}};
      j["fitted_residual_norm"] = rep.fitted_residual_norm;
    }
    out << j.dump(2) << "\n";
  } else if (opt.format == "csv") {
    out << "scenario,design,observations,fvalue,ndf,ddf,lambda,fcrit,alpha,power,ddf_policy\n";
    out << s.name << ',' << wp::to_string(s.design.kind) << ',' << rep.observations << ',' << full(p.fvalue) << ','
        << p.ndf << ',' << p.ddf << ',' << full(p.lambda) << ',' << full(p.fcrit) << ',' << full(p.alpha) << ','
        << full(p.power) << ',' << wp::to_string(rep.ddf_policy) << "\n";
  } else {
    out << "scenario     " << s.name << " (" << wp::to_string(s.design.kind) << ", N=" << rep.observations << ")\n";
    out << "ddf policy   " << wp::to_string(rep.ddf_policy) << ": " << rep.ddf.rule << "\n";
    out << "fvalue       " << fixed(p.fvalue, 4) << "\n";
    out << "ndf          " << p.ndf << "\n";
    out << "ddf          " << p.ddf << "\n";
    out << "lambda       " << fixed(p.lambda, 4) << "\n";
    out << "fcrit        " << fixed(p.fcrit, 4) << "  (alpha " << p.alpha << ")\n";
    out << "power        " << fixed(p.power, 3) << "\n";
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
    if (opt.audit) {
      out << "beta:\n";
      for (std::size_t i = 0; i < rep.column_names.size(); ++i) {
        out << "  " << std::left << std::setw(12) << rep.column_names[i] << full(rep.beta(static_cast<Eigen::Index>(i)))
            << "\n";
      }
      out << "contrast " << rep.contrast.label << ":\n" << wp::format_matrix_fixed(rep.contrast.l, 0);
      out << "fit residual norm " << rep.fitted_residual_norm << "\n";
    }
  }
  emit(opt, out.str());
  return 0;
}

// ---- mc ----

int cmd_mc(const Options& opt) {
  if (opt.reps < 1) throw wp::DomainError("--reps must be >= 1");
  const auto s = load_scenario(opt);
  wp::SimulationPlan plan;
  plan.spec = s.design;
  plan.params = s.correlation;
  plan.policy = s.ddf_policy;
  plan.replicates = opt.reps;
  plan.seed = opt.seed;
  const auto mc = wp::empirical_power(plan);
  const auto analytic = wp::analytic_power(s.design, s.correlation, s.ddf_policy).result.power;
  const double diff = mc.estimate - analytic;
  const double z = mc.mc_stderr > 0.0 ? diff / mc.mc_stderr : 0.0;

  std::ostringstream out;
  if (opt.format == "json") {
    json j{{"scenario", s.name},       {"replicates", mc.replicates}, {"seed", opt.seed},
           {"rejections", mc.rejections}, {"estimate", mc.estimate},   {"mc_stderr", mc.mc_stderr},
           {"ci95", {mc.ci95.first, mc.ci95.second}}, {"fcrit", mc.fcrit}, {"ndf", mc.ndf}, {"ddf", mc.ddf},
           {"analytic_power", analytic}};
    out << j.dump(2) << "\n";
  } else if (opt.format == "csv") {
    out << "scenario,replicates,seed,rejections,estimate,mc_stderr,ci_low,ci_high,analytic_power\n";
    out << s.name << ',' << mc.replicates << ',' << opt.seed << ',' << mc.rejections << ',' << full(mc.estimate) << ','
        << full(mc.mc_stderr) << ',' << full(mc.ci95.first) << ',' << full(mc.ci95.second) << ',' << full(analytic)
        << "\n";
  } else {
    out << "scenario     " << s.name << "\n";
    out << "replicates   " << mc.replicates << " (seed " << opt.seed << ")\n";
    out << "rejections   " << mc.rejections << "\n";
    out << "estimate     " << fixed(mc.estimate, 3) << "  (se " << fixed(mc.mc_stderr, 4) << ")\n";
    out << "95% CI       [" << fixed(mc.ci95.first, 3) << ", " << fixed(mc.ci95.second, 3) << "]\n";
    out << "analytic     " << fixed(analytic, 3) << "  difference " << (diff >= 0 ? "+" : "") << fixed(diff, 4);
    if (mc.mc_stderr > 0.0) out << " (" << fixed(z, 2) << " se)";
    out << "\n";
  }
  emit(opt, out.str());
  return 0;
}

// ---- dataset / vmatrix ----

int cmd_dataset(const Options& opt) {
  const auto s = load_scenario(opt);
  emit(opt, wp::dataset_to_csv(wp::exemplary_dataset(s.design)));
  return 0;
}

int cmd_vmatrix(const Options& opt) {
  const auto s = load_scenario(opt);
  const int clusters = s.design.total_clusters();
  if (opt.cluster_index < 1 || opt.cluster_index > clusters) {
    throw std::out_of_range("--cluster-index " + std::to_string(opt.cluster_index) + " outside 1.." +
                            std::to_string(clusters));
  }
  const auto comps = wp::derive_components(s.correlation, wp::family_of(s.design.kind));
  const auto block = wp::build_cluster_v(wp::cluster_shape(s.design, opt.cluster_index - 1), comps);
  const Eigen::MatrixXd m = opt.correlation ? wp::vcorr(block) : block.cluster_matrix;
  emit(opt, opt.format == "csv" ? wp::format_matrix_csv(m) : wp::format_matrix_fixed(m, 1));
  return 0;
}

void report_error(const std::exception& e) {
  if (const auto* v = dynamic_cast<const wp::ValidationError*>(&e)) {
    std::cerr << "error: invalid specification\n";
    for (const auto& issue : v->issues()) {
      std::cerr << "  " << (issue.path.empty() ? "(document)" : issue.path) << ": " << issue.message << "\n";
    }
    return;
  }
  std::cerr << "error: " << e.what() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power and sample size for cluster randomized and stepped wedge trials"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool formats) {
    sub->add_option("--spec", opt.spec_file, "JSON spec document")->check(CLI::ExistingFile);
    sub->add_option("--preset", opt.preset, "built-in scenario (example1 ... example7)");
    sub->add_option("--alpha", opt.alpha, "override the test size")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--ddf-policy", opt.ddf_policy, "residual | containment | between_within");
    sub->add_option("--out", opt.out, "write output to this file");
    if (formats) {
      sub->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"table", "json", "csv"}));
    }
  };

  auto* de = app.add_subcommand("de", "closed-form design effect and sample plan");
  add_common(de, true);
  de->add_option("--n-unclustered", opt.n_unclustered, "sample size required without clustering");

  auto* power = app.add_subcommand("power", "analytic power via GLS on the exemplary dataset");
  add_common(power, true);
  power->add_flag("--audit", opt.audit, "also print beta-hat and the contrast");

  auto* mc = app.add_subcommand("mc", "Monte Carlo empirical power");
  add_common(mc, true);
  mc->add_option("--reps", opt.reps, "replicates");
  mc->add_option("--seed", opt.seed, "base seed");

  auto* dataset = app.add_subcommand("dataset", "exemplary dataset as CSV");
  add_common(dataset, false);

  auto* vmatrix = app.add_subcommand("vmatrix", "covariance block of one cluster");
  add_common(vmatrix, false);
  vmatrix->add_option("--cluster-index", opt.cluster_index, "1-based cluster index");
  vmatrix->add_flag("--correlation", opt.correlation, "print the correlation matrix instead");
  vmatrix->add_option("--format", opt.format, "table or csv")->check(CLI::IsMember({"table", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*de) return cmd_de(opt);
    if (*power) return cmd_power(opt);
    if (*mc) return cmd_mc(opt);
    if (*dataset) return cmd_dataset(opt);
    if (*vmatrix) return cmd_vmatrix(opt);
  } catch (const std::exception& e) {
    report_error(e);
    return 1;
  }
  return 1;
}
