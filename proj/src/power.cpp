#include "wedgepower/power.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <utility>

namespace wedgepower {

namespace {

constexpr std::array<std::pair<DdfPolicy, std::string_view>, 3> kPolicyNames{{
    {DdfPolicy::residual, "residual"},
    {DdfPolicy::containment, "containment"},
    {DdfPolicy::between_within, "between_within"},
}};

// Column j of x takes a single value inside every cluster.
bool constant_within_clusters(const Eigen::MatrixXd& x, Eigen::Index j, const std::vector<int>& cluster) {
  std::map<int, double> seen;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto [it, inserted] = seen.emplace(cluster[static_cast<std::size_t>(i)], x(i, j));
    if (!inserted && it->second != x(i, j)) return false;
  }
  return true;
}

Eigen::MatrixXd columns_of(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
  return out;
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

std::string_view to_string(DdfPolicy policy) {
  for (const auto& [p, name] : kPolicyNames) {
    if (p == policy) return name;
  }
  return "unknown";
}

std::optional<DdfPolicy> parse_ddf_policy(std::string_view name) {
  for (const auto& [p, n] : kPolicyNames) {
    if (n == name) return p;
  }
  return std::nullopt;
}

DdfPolicy default_ddf_policy(DesignKind kind) {
  switch (kind) {
    case DesignKind::rct_post:
    case DesignKind::rct_prepost:
      return DdfPolicy::residual;
    case DesignKind::crt_post:
      return DdfPolicy::containment;
    default:
      return DdfPolicy::between_within;
  }
}

// -------------------------------------------------------------------------
// GLS with a known block-diagonal covariance
// -------------------------------------------------------------------------

GlsOperator::GlsOperator(Eigen::MatrixXd x, const StudyCovariance& v) : x_(std::move(x)) {
  if (v.dimension() != x_.rows()) {
    throw InvalidParameter("covariance dimension " + std::to_string(v.dimension()) +
                           " does not match " + std::to_string(x_.rows()) + " design rows");
  }
  const int rank = matrix_rank(x_);
  if (rank < x_.cols()) {
    throw InvalidParameter("design matrix is rank deficient (rank " + std::to_string(rank) + ")");
  }

  const Eigen::Index p = x_.cols();
  vinv_x_.resize(x_.rows(), p);
  Eigen::MatrixXd information = Eigen::MatrixXd::Zero(p, p);

  for (std::size_t b = 0; b < v.blocks.size(); ++b) {
    const Eigen::MatrixXd& block = v.blocks[b].cluster_matrix;
    const int offset = v.offsets[b];
    const auto m = static_cast<int>(block.rows());
    offsets_.push_back(offset);
    sizes_.push_back(m);

    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) {
      throw InvalidParameter("cluster " + std::to_string(b + 1) + " covariance is not positive definite");
    }
    const auto xc = x_.middleRows(offset, m);
    vinv_x_.middleRows(offset, m) = llt.solve(xc);
    information.noalias() += xc.transpose() * vinv_x_.middleRows(offset, m);

    if (m <= 400) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      max_condition_ = std::max(max_condition_, lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
    }
  }

  Eigen::LLT<Eigen::MatrixXd> info_llt(information);
  if (info_llt.info() != Eigen::Success) {
    throw InvalidParameter("X' V^-1 X is singular");
  }
  beta_cov_ = info_llt.solve(Eigen::MatrixXd::Identity(p, p));
}

Eigen::VectorXd GlsOperator::fit(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (y.size() != x_.rows()) throw InvalidParameter("outcome length does not match design rows");
  Eigen::VectorXd xt_vinv_y = Eigen::VectorXd::Zero(x_.cols());
  // Fixed cluster order keeps the reduction bitwise reproducible.
  for (std::size_t b = 0; b < offsets_.size(); ++b) {
    xt_vinv_y.noalias() += vinv_x_.middleRows(offsets_[b], sizes_[b]).transpose() *
                           y.segment(offsets_[b], sizes_[b]);
  }
  return beta_cov_ * xt_vinv_y;
}

Eigen::VectorXd gls_estimate(const Eigen::MatrixXd& x, const StudyCovariance& v, const Eigen::VectorXd& y) {
  return GlsOperator(x, v).fit(y);
}

// -------------------------------------------------------------------------
// Wald F
// -------------------------------------------------------------------------

WaldStatistic::WaldStatistic(const Eigen::MatrixXd& l, const Eigen::MatrixXd& beta_covariance) : l_(l) {
  if (l.cols() != beta_covariance.rows()) {
    throw InvalidParameter("contrast has " + std::to_string(l.cols()) + " columns for " +
                           std::to_string(beta_covariance.rows()) + " parameters");
  }
  ndf_ = matrix_rank(l);
  if (ndf_ < 1 || ndf_ < l.rows()) throw InvalidParameter("contrast rows must be linearly independent");
  const Eigen::MatrixXd middle = l * beta_covariance * l.transpose();
  middle_.compute(middle);
  const Eigen::VectorXd d = middle_.vectorD();
  const double scale = std::max(middle.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  if (middle_.info() != Eigen::Success || d.minCoeff() <= 1e-13 * scale) {
    throw InvalidParameter("L (X'V^-1X)^-1 L' is singular; the contrast is not estimable");
  }
}

double WaldStatistic::fvalue(const Eigen::Ref<const Eigen::VectorXd>& beta) const {
  const Eigen::VectorXd lb = l_ * beta;
  return lb.dot(middle_.solve(lb)) / ndf_;
}

WaldTest wald_f(const Eigen::VectorXd& beta, const Eigen::MatrixXd& beta_covariance,
                const HypothesisContrast& contrast) {
  const WaldStatistic stat(contrast.l, beta_covariance);
  return {stat.fvalue(beta), stat.ndf()};
}

// -------------------------------------------------------------------------
// Denominator degrees of freedom
// -------------------------------------------------------------------------

DdfBreakdown resolve_ddf_detail(const DesignSpec& spec, DdfPolicy policy) {
  const ExemplaryDataset data = exemplary_dataset(spec);
  const DesignMatrix dm = design_matrix(spec, data);
  const HypothesisContrast contrast = hypothesis_contrast(spec);
  const Eigen::MatrixXd& x = dm.x;

  std::vector<int> cluster(data.rows.size());
  for (std::size_t i = 0; i < data.rows.size(); ++i) cluster[i] = data.rows[i].cluster_id - 1;

  DdfBreakdown out;
  out.observations = static_cast<int>(x.rows());
  out.rank_x = matrix_rank(x);
  out.clusters = spec.total_clusters();
  out.residual = out.observations - out.rank_x;

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(x.rows(), out.clusters);
  for (std::size_t i = 0; i < cluster.size(); ++i) z(static_cast<Eigen::Index>(i), cluster[i]) = 1.0;

  std::vector<bool> cluster_constant(static_cast<std::size_t>(x.cols()));
  std::vector<Eigen::Index> constant_cols;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    cluster_constant[static_cast<std::size_t>(j)] = constant_within_clusters(x, j, cluster);
    if (cluster_constant[static_cast<std::size_t>(j)]) constant_cols.push_back(j);
  }
  out.between = out.clusters - matrix_rank(columns_of(x, constant_cols));
  out.within = out.residual - out.between;

  switch (policy) {
    case DdfPolicy::residual:
      out.ddf = out.residual;
      out.rule = "N - rank(X)";
      break;

    case DdfPolicy::containment:
      if (is_individually_randomized(spec.kind)) {
        throw InvalidParameter("containment ddf needs a clustered design; " + std::string(to_string(spec.kind)) +
                               " randomizes individuals");
      }
      out.ddf = out.observations - matrix_rank(hcat(x, z));
      out.rule = "N - rank([X | cluster])";
      break;

    case DdfPolicy::between_within: {
      std::vector<const ModelTerm*> tested;
      for (const auto& term : dm.terms) {
        for (int c = term.first_column; c < term.first_column + term.columns; ++c) {
          if ((contrast.l.col(c).array() != 0.0).any()) {
            tested.push_back(&term);
            break;
          }
        }
      }
      auto varies_within = [&](const ModelTerm& term) {
        for (int c = term.first_column; c < term.first_column + term.columns; ++c) {
          if (!cluster_constant[static_cast<std::size_t>(c)]) return true;
        }
        return false;
      };

      const bool any_within = std::any_of(tested.begin(), tested.end(),
                                          [&](const ModelTerm* t) { return varies_within(*t); });
      if (!any_within) {
        out.ddf = out.between;
        out.rule = "between-cluster: clusters - rank(cluster-level columns)";
        break;
      }

      int within_classification_terms = 0;
      for (const auto& term : dm.terms) {
        if (term.classification && varies_within(term)) ++within_classification_terms;
      }
      const ModelTerm* target = nullptr;
      for (const ModelTerm* t : tested) {
        if (t->classification && varies_within(*t)) target = t;
      }
      if (target == nullptr || within_classification_terms < 2) {
        out.ddf = out.within;
        out.rule = "within-cluster: residual - between";
        break;
      }

      // Cluster-by-effect interaction stratum for a classification term.
      std::map<std::tuple<int, int, int>, int> cells;
      for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& row = data.rows[i];
        cells.try_emplace({cluster[i], target->uses_arm ? row.arm : 0, target->uses_time ? row.time : 0},
                          static_cast<int>(cells.size()));
      }
      std::vector<Eigen::Index> marginal_cols;
      for (const auto& term : dm.terms) {
        const bool contained = (!term.uses_arm || target->uses_arm) && (!term.uses_time || target->uses_time);
        if (!contained) continue;
        for (int c = term.first_column; c < term.first_column + term.columns; ++c) marginal_cols.push_back(c);
      }
      const int marginal_rank = matrix_rank(hcat(z, columns_of(x, marginal_cols)));
      out.ddf = static_cast<int>(cells.size()) - marginal_rank;
      out.rule = "cluster x " + target->name + " interaction stratum";
      break;
    }
  }

  if (out.ddf < 1) {
    throw InvalidParameter(std::string(to_string(policy)) + " policy leaves no denominator degrees of freedom for " +
                           std::string(to_string(spec.kind)));
  }
  return out;
}

int resolve_ddf(const DesignSpec& spec, DdfPolicy policy) { return resolve_ddf_detail(spec, policy).ddf; }

// -------------------------------------------------------------------------
// Analytic power
// -------------------------------------------------------------------------

PowerReport analytic_power(const DesignSpec& spec, const CorrelationParams& params,
                           std::optional<DdfPolicy> policy) {
  require_valid(spec);
  PowerReport report;
  report.ddf_policy = policy.value_or(default_ddf_policy(spec.kind));

  const ExemplaryDataset data = exemplary_dataset(spec);
  const DesignMatrix dm = design_matrix(spec, data);
  report.contrast = hypothesis_contrast(spec);
  report.column_names = dm.column_names;
  report.observations = static_cast<int>(data.rows.size());

  const VarianceComponents comps = derive_components(params, family_of(spec.kind));
  const StudyCovariance v = assemble_study_v(spec, comps);
  const GlsOperator gls(dm.x, v);
  if (gls.max_condition() > 1e10) {
    report.warnings.push_back("cluster covariance condition number exceeds 1e10");
  }

  const Eigen::VectorXd y = data.mean_vector();
  report.beta = gls.fit(y);
  report.fitted_residual_norm = (y - dm.x * report.beta).norm();
  // The exemplary means lie in the column space of X, so the fit is exact and
  // ndf * F equals the noncentrality quadratic form evaluated at the true beta.
  assert(report.fitted_residual_norm <= 1e-8 * std::max(1.0, y.norm()));

  const WaldTest wald = wald_f(report.beta, gls.beta_covariance(), report.contrast);
  report.ddf = resolve_ddf_detail(spec, report.ddf_policy);
  report.result = power_from_f(wald.fvalue, wald.ndf, report.ddf.ddf, spec.alpha);
  return report;
}

}  // namespace wedgepower
