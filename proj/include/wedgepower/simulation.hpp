#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wedgepower/correlation.hpp"
#include "wedgepower/design.hpp"
#include "wedgepower/power.hpp"

namespace wedgepower {

/// Draws y = mu + chol(V_c) z cluster by cluster. Replicate r of seed s always
/// reads the same random substream, whatever thread evaluates it.
class ReplicateSampler {
 public:
  ReplicateSampler(Eigen::VectorXd mean, const StudyCovariance& v);

  int dimension() const { return static_cast<int>(mean_.size()); }
  Eigen::VectorXd sample(std::uint64_t seed, std::uint64_t replicate) const;
  void sample_into(std::uint64_t seed, std::uint64_t replicate, Eigen::VectorXd& y) const;

 private:
  Eigen::VectorXd mean_;
  std::vector<int> offsets_;
  std::vector<int> block_of_cluster_;
  std::vector<Eigen::MatrixXd> factors_;  // lower Cholesky factor per distinct block
};

Eigen::VectorXd sample_replicate(const DesignSpec& spec, const VarianceComponents& comps,
                                 std::uint64_t seed, std::uint64_t replicate);

/// How each replicate's Wald statistic is scaled.
enum class ScaleMode {
  /// Correlation structure known, overall scale estimated from ddf whitened
  /// residual directions: F is exactly noncentral F(ndf, ddf, lambda).
  estimated,
  /// V fully known: the statistic is chi-square(ndf, lambda) / ndf, so the
  /// F critical value is conservative.
  known,
};

struct SimulationPlan {
  DesignSpec spec;
  CorrelationParams params;
  std::optional<DdfPolicy> policy;
  ScaleMode scale = ScaleMode::estimated;
  long replicates = 1000;
  std::uint64_t seed = 1;
  /// 0 picks WEDGEPOWER_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

struct EmpiricalPower {
  double estimate = 0.0;
  long replicates = 0;
  long rejections = 0;
  double mc_stderr = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
  double fcrit = 0.0;
  int ndf = 1;
  int ddf = 1;
};

EmpiricalPower empirical_power(const SimulationPlan& plan);

/// Threads requested through WEDGEPOWER_THREADS, if set and valid.
std::optional<unsigned> threads_from_env();

}  // namespace wedgepower
