#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wedgepower/correlation.hpp"
#include "wedgepower/design.hpp"
#include "wedgepower/distributions.hpp"

namespace wedgepower {

enum class DdfPolicy { residual, containment, between_within };

std::string_view to_string(DdfPolicy policy);
std::optional<DdfPolicy> parse_ddf_policy(std::string_view name);
DdfPolicy default_ddf_policy(DesignKind kind);

/// Known-covariance GLS on a block-diagonal V. Each cluster block is
/// factorized once; fits for new outcome vectors reuse the factorizations.
class GlsOperator {
 public:
  GlsOperator(Eigen::MatrixXd x, const StudyCovariance& v);

  const Eigen::MatrixXd& x() const { return x_; }
  /// (X' V^-1 X)^-1
  const Eigen::MatrixXd& beta_covariance() const { return beta_cov_; }
  /// Largest per-block condition number seen.
  double max_condition() const { return max_condition_; }

  Eigen::VectorXd fit(const Eigen::Ref<const Eigen::VectorXd>& y) const;

 private:
  Eigen::MatrixXd x_;
  std::vector<int> offsets_;
  std::vector<int> sizes_;
  // V_c^-1 X_c for each cluster, stacked in study order.
  Eigen::MatrixXd vinv_x_;
  Eigen::MatrixXd beta_cov_;
  double max_condition_ = 1.0;
};

/// beta_hat = (X'V^-1X)^-1 X'V^-1 y.
Eigen::VectorXd gls_estimate(const Eigen::MatrixXd& x, const StudyCovariance& v,
                             const Eigen::VectorXd& y);

struct WaldTest {
  double fvalue = 0.0;
  int ndf = 1;
};

/// Precomputed Wald F for a fixed contrast and beta covariance.
class WaldStatistic {
 public:
  WaldStatistic(const Eigen::MatrixXd& l, const Eigen::MatrixXd& beta_covariance);

  int ndf() const { return ndf_; }
  double fvalue(const Eigen::Ref<const Eigen::VectorXd>& beta) const;

 private:
  Eigen::MatrixXd l_;
  Eigen::LDLT<Eigen::MatrixXd> middle_;
  int ndf_ = 1;
};

WaldTest wald_f(const Eigen::VectorXd& beta, const Eigen::MatrixXd& beta_covariance,
                const HypothesisContrast& contrast);

struct DdfBreakdown {
  int observations = 0;
  int rank_x = 0;
  int clusters = 0;
  int residual = 0;
  int between = 0;
  int within = 0;
  int ddf = 0;
  std::string rule;
};

DdfBreakdown resolve_ddf_detail(const DesignSpec& spec, DdfPolicy policy);
int resolve_ddf(const DesignSpec& spec, DdfPolicy policy);

/// Direct analytic power with every intermediate kept for audit.
struct PowerReport {
  PowerResult result;
  DdfPolicy ddf_policy = DdfPolicy::residual;
  DdfBreakdown ddf;
  Eigen::VectorXd beta;
  std::vector<std::string> column_names;
  HypothesisContrast contrast;
  double fitted_residual_norm = 0.0;
  int observations = 0;
  std::vector<std::string> warnings;
};

PowerReport analytic_power(const DesignSpec& spec, const CorrelationParams& params,
                           std::optional<DdfPolicy> policy = std::nullopt);

}  // namespace wedgepower
