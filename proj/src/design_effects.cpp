#include "wedgepower/design_effects.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "wedgepower/errors.hpp"

namespace wedgepower {

namespace {

void check_icc(double icc) {
  if (!(icc >= 0.0 && icc < 1.0)) throw DomainError("icc must lie in [0, 1)");
}

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

void check_size(double n) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw DomainError("cluster size must be >= 1");
}

double clustering(double n, double icc) { return 1.0 + (n - 1.0) * icc; }

std::string fixed(double v, int decimals) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(decimals);
  out << v;
  return out.str();
}

}  // namespace

DesignEffectResult de_simple(double m, double icc) {
  check_size(m);
  check_icc(icc);
  DesignEffectResult out;
  out.clustering_factor = clustering(m, icc);
  out.de = out.clustering_factor;
  return out;
}

double cluster_mean_correlation(double n, double icc, double cac, double sac) {
  check_size(n);
  check_icc(icc);
  check_unit(cac, "cac");
  check_unit(sac, "sac");
  const double denom = clustering(n, icc);
  return n * icc / denom * cac + (1.0 - icc) / denom * sac;
}

DesignEffectResult de_ancova_prepost(double n, double icc, double cac, double sac) {
  const double r = cluster_mean_correlation(n, icc, cac, sac);
  DesignEffectResult out;
  out.clustering_factor = clustering(n, icc);
  out.repeated_factor = 1.0 - r * r;
  out.de = out.clustering_factor * out.repeated_factor;
  out.r = r;
  return out;
}

DesignEffectResult de_stepped_wedge(int k, int b, int t, double n, double icc) {
  if (k < 2) throw DomainError("stepped wedge design effect needs at least 2 steps");
  if (b < 1 || t < 1) throw DomainError("baseline and per-step measurement counts must be >= 1");
  check_size(n);
  check_icc(icc);
  const double ktn = static_cast<double>(k) * t * n;
  const double bn = static_cast<double>(b) * n;
  DesignEffectResult out;
  out.clustering_factor = (1.0 + icc * (ktn + bn - 1.0)) / (1.0 + icc * (0.5 * ktn + bn - 1.0));
  out.repeated_factor = 3.0 * (1.0 - icc) / (2.0 * t * (k - 1.0 / k));
  out.de = out.clustering_factor * out.repeated_factor;
  return out;
}

DesignEffectResult de_three_measurement(double n, double icc, double cac, double sac) {
  const double r = cluster_mean_correlation(n, icc, cac, sac);
  DesignEffectResult out;
  out.clustering_factor = clustering(n, icc);
  out.repeated_factor = 1.0 - 2.0 * r * r / (1.0 + r);
  out.de = out.clustering_factor * out.repeated_factor;
  out.r = r;
  return out;
}

SamplePlan inflate_sample_size(double n_unclustered, double de, int observations_multiplier) {
  if (!(n_unclustered >= 1.0)) throw DomainError("unclustered sample size must be >= 1");
  if (!(de > 0.0)) throw DomainError("design effect must be > 0");
  if (observations_multiplier < 1) throw DomainError("observations multiplier must be >= 1");
  SamplePlan plan;
  plan.n_unclustered = n_unclustered;
  plan.de = de;
  plan.observations_multiplier = observations_multiplier;
  plan.participants = n_unclustered * de;
  plan.n_required = plan.participants * observations_multiplier;
  plan.n_rounded = static_cast<long>(std::ceil(plan.n_required * (1.0 - 1e-12)));
  if (observations_multiplier > 1) {
    plan.plan_note = fixed(plan.participants, 2) + " per measurement period x " +
                     std::to_string(observations_multiplier) + " periods = " + fixed(plan.n_required, 2) +
                     " observations";
  }
  return plan;
}

ClusterPlanBracket equal_cluster_plans(double n_required, int cluster_size, int arms) {
  if (cluster_size < 1) throw DomainError("cluster size must be >= 1");
  if (arms < 1) throw DomainError("arms must be >= 1");
  if (!(n_required > 0.0)) throw DomainError("required sample size must be > 0");

  auto make = [&](int clusters) {
    ClusterPlan plan;
    plan.clusters = clusters;
    plan.total = static_cast<long>(clusters) * cluster_size;
    for (int a = 0; a < arms; ++a) {
      plan.clusters_per_arm.push_back(clusters / arms + (a < clusters % arms ? 1 : 0));
    }
    return plan;
  };

  int upper = static_cast<int>(std::ceil(n_required / cluster_size * (1.0 - 1e-12)));
  upper = std::max(upper, arms);
  ClusterPlanBracket out;
  out.at_or_above = make(upper);
  out.exact = std::fabs(static_cast<double>(out.at_or_above.total) - n_required) < 1e-9 * n_required;
  if (!out.exact && upper - 1 >= arms) out.below = make(upper - 1);
  return out;
}

SamplePlan inflate_sample_size(double n_unclustered, double de, int observations_multiplier,
                               int cluster_size, int arms) {
  SamplePlan plan = inflate_sample_size(n_unclustered, de, observations_multiplier);
  const auto bracket = equal_cluster_plans(plan.n_required, cluster_size, arms);
  plan.n_rounded = bracket.at_or_above.total;
  std::ostringstream note;
  if (!plan.plan_note.empty()) note << plan.plan_note << "; ";
  if (bracket.exact) {
    note << bracket.at_or_above.clusters << " clusters of " << cluster_size << " match "
         << bracket.at_or_above.total << " exactly";
  } else {
    note << "no equal-cluster plan with clusters of " << cluster_size << " matches "
         << fixed(plan.n_required, 2) << "; ";
    if (bracket.below) {
      note << bracket.below->clusters << " clusters give " << bracket.below->total << ", ";
    }
    note << bracket.at_or_above.clusters << " clusters give " << bracket.at_or_above.total;
  }
  plan.plan_note = note.str();
  return plan;
}

double adjust_statistic(double stat, StatisticKind kind, double de) {
  if (!(de > 0.0)) throw DomainError("design effect must be > 0");
  return kind == StatisticKind::chi_square ? stat / de : stat / std::sqrt(de);
}

}  // namespace wedgepower
