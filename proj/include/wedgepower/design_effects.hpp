#pragma once

#include <optional>
#include <string>
#include <vector>

namespace wedgepower {

struct DesignEffectResult {
  double de = 1.0;
  /// Design effect due to cluster randomization, 1 + (n-1) rho.
  double clustering_factor = 1.0;
  /// Design effect due to repeated assessment; 1 when not applicable.
  double repeated_factor = 1.0;
  std::optional<double> r;
};

DesignEffectResult de_simple(double m, double icc);

/// Correlation between a cluster's baseline and follow-up means.
double cluster_mean_correlation(double n, double icc, double cac, double sac);

/// Pre-post ANCOVA design effect: [1 + (n-1) rho] (1 - r^2).
DesignEffectResult de_ancova_prepost(double n, double icc, double cac, double sac);

/// Cross-sectional stepped wedge design effect for k steps, b baseline and
/// t per-step measurements. Requires k >= 2.
DesignEffectResult de_stepped_wedge(int k, int b, int t, double n, double icc);

/// Three-measurement (b = 1, k = 2, t = 1) design effect:
/// [1 + (n-1) rho] (1 - 2 r^2 / (1 + r)).
DesignEffectResult de_three_measurement(double n, double icc, double cac, double sac);

struct SamplePlan {
  double n_unclustered = 0.0;
  double de = 1.0;
  int observations_multiplier = 1;
  /// n_unclustered * de: participants, each contributing one measurement.
  double participants = 0.0;
  /// participants * observations_multiplier.
  double n_required = 0.0;
  long n_rounded = 0;
  std::string plan_note;
};

SamplePlan inflate_sample_size(double n_unclustered, double de, int observations_multiplier = 1);

struct ClusterPlan {
  int clusters = 0;
  std::vector<int> clusters_per_arm;
  long total = 0;
};

/// Nearest equal-size cluster plans around a target total: the largest plan
/// below the target and the smallest plan at or above it.
struct ClusterPlanBracket {
  std::optional<ClusterPlan> below;
  ClusterPlan at_or_above;
  bool exact = false;
};

ClusterPlanBracket equal_cluster_plans(double n_required, int cluster_size, int arms = 2);

/// Same as inflate_sample_size, but rounds up to the smallest equal-cluster
/// plan and explains the gap in plan_note.
SamplePlan inflate_sample_size(double n_unclustered, double de, int observations_multiplier,
                               int cluster_size, int arms = 2);

enum class StatisticKind { chi_square, t };

/// Cluster adjustment of a statistic computed as if observations were independent.
double adjust_statistic(double stat, StatisticKind kind, double de);

}  // namespace wedgepower
