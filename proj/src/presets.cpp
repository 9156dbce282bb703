#include "wedgepower/presets.hpp"

#include <algorithm>

namespace wedgepower {

namespace {

DesignSpec two_arm(DesignKind kind, std::vector<int> clusters, std::vector<int> sizes, std::vector<double> means) {
  DesignSpec d;
  d.kind = kind;
  d.clusters_per_arm = std::move(clusters);
  d.cluster_sizes = std::move(sizes);
  d.means = std::move(means);
  return d;
}

DesignSpec individual(DesignKind kind, int n, std::vector<double> means) {
  DesignSpec d;
  d.kind = kind;
  d.per_group_n = n;
  d.means = std::move(means);
  return d;
}

DesignSpec stepped(DesignKind kind, std::vector<int> per_step, int n) {
  DesignSpec d;
  d.kind = kind;
  d.steps_k = static_cast<int>(per_step.size());
  d.baseline_b = 1;
  d.per_step_t = 1;
  d.clusters_per_step = std::move(per_step);
  d.cluster_sizes = {n};
  d.means = {54.0, 59.0};
  return d;
}

CorrelationParams corr(double icc, double cac, double sac) {
  CorrelationParams p;
  p.icc = icc;
  p.cac = cac;
  p.sac = sac;
  return p;
}

std::vector<Scenario> build() {
  const std::vector<double> post{59.0, 54.0};
  const std::vector<double> prepost{54.0, 56.0, 54.0, 61.0};
  return {
      {"example1", "individually randomized, post-test only, 17 per arm",
       individual(DesignKind::rct_post, 17, post), corr(0.0, 1.0, 0.0), std::nullopt},
      {"example2", "cluster randomized, 5 vs 4 clusters of 6",
       two_arm(DesignKind::crt_post, {5, 4}, {6}, post), corr(0.1, 1.0, 0.0), std::nullopt},
      {"example2-8x6", "cluster randomized, 4 vs 4 clusters of 6",
       two_arm(DesignKind::crt_post, {4, 4}, {6}, post), corr(0.1, 1.0, 0.0), std::nullopt},
      {"example2-n51", "cluster randomized, 8 clusters of 6 or 7 (N = 51)",
       two_arm(DesignKind::crt_post, {4, 4}, {6, 6, 6, 7, 6, 6, 7, 7}, post), corr(0.1, 1.0, 0.0),
       std::nullopt},
      {"example3", "individually randomized pre-post, 32 per cell",
       individual(DesignKind::rct_prepost, 32, prepost), corr(0.0, 1.0, 0.0), std::nullopt},
      {"example3-n124", "individually randomized pre-post, 31 per cell",
       individual(DesignKind::rct_prepost, 31, prepost), corr(0.0, 1.0, 0.0), std::nullopt},
      {"example4", "cluster randomized pre-post, cross-sectional, 6 vs 6 clusters of 10",
       two_arm(DesignKind::crt_prepost_xsec, {6, 6}, {10}, prepost), corr(0.1, 0.4, 0.0), std::nullopt},
      {"example5", "cluster randomized pre-post, cohort, 5 vs 4 clusters of 10",
       two_arm(DesignKind::crt_prepost_cohort, {5, 4}, {10}, prepost), corr(0.1, 0.4, 0.6), std::nullopt},
      {"example6", "stepped wedge, cross-sectional, 2 steps of 4 clusters of 5",
       stepped(DesignKind::swd_xsec, {4, 4}, 5), corr(0.1, 1.0, 0.0), std::nullopt},
      {"example7", "stepped wedge, cohort, 2 steps of 3 clusters of 5",
       stepped(DesignKind::swd_cohort, {3, 3}, 5), corr(0.1, 0.4, 0.6), std::nullopt},
  };
}

}  // namespace

const std::vector<Scenario>& presets() {
  static const std::vector<Scenario> table = build();
  return table;
}

std::optional<Scenario> find_preset(std::string_view name) {
  const auto& table = presets();
  auto it = std::find_if(table.begin(), table.end(), [&](const Scenario& s) { return s.name == name; });
  if (it == table.end()) return std::nullopt;
  return *it;
}

Scenario with_null_means(Scenario scenario) {
  auto& means = scenario.design.means;
  if (!means.empty()) std::fill(means.begin(), means.end(), means.front());
  scenario.name += "-null";
  return scenario;
}

}  // namespace wedgepower
