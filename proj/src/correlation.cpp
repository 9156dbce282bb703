#include "wedgepower/correlation.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace wedgepower {

std::vector<ValidationIssue> validate_params(const CorrelationParams& params, Family family) {
  std::vector<ValidationIssue> issues;
  if (!(params.sigma_y_sq > 0.0) || !std::isfinite(params.sigma_y_sq)) {
    issues.push_back({"correlation.sigma_y_sq", "must be > 0"});
  }
  if (!(params.icc >= 0.0 && params.icc < 1.0)) {
    issues.push_back({"correlation.icc", "must lie in [0, 1)"});
  }
  if (!(params.cac >= 0.0 && params.cac <= 1.0)) {
    issues.push_back({"correlation.cac", "must lie in [0, 1]"});
  }
  if (!(params.sac >= 0.0 && params.sac <= 1.0)) {
    issues.push_back({"correlation.sac", "must lie in [0, 1]"});
  } else if (family == Family::cross_sectional && params.sac != 0.0) {
    issues.push_back({"correlation.sac", "cross-sectional designs remeasure no subject; sac must be 0"});
  }
  return issues;
}

VarianceComponents derive_components(const CorrelationParams& params, Family family) {
  const auto issues = validate_params(params, family);
  if (!issues.empty()) {
    throw InvalidParameter(issues.front().path + ": " + issues.front().message);
  }
  const double total = params.sigma_y_sq;
  const double rho = params.icc;
  VarianceComponents out;
  switch (family) {
    case Family::single_measurement:
      out.sigma_c_sq = rho * total;
      out.sigma_e_sq = (1.0 - rho) * total;
      break;
    case Family::cross_sectional:
      out.sigma_c_sq = params.cac * rho * total;
      out.sigma_ct_sq = rho * total - out.sigma_c_sq;
      out.sigma_e_sq = (1.0 - rho) * total;
      break;
    case Family::cohort:
      out.sigma_c_sq = params.cac * rho * total;
      out.sigma_ct_sq = rho * total - out.sigma_c_sq;
      out.sigma_s_sq = params.sac * (1.0 - rho) * total;
      out.sigma_st_sq = (1.0 - rho) * total - out.sigma_s_sq;
      break;
  }
  // Rounding can leave -1e-17 where the exact value is 0.
  const double floor = -1e-12 * total;
  for (double* c : {&out.sigma_c_sq, &out.sigma_ct_sq, &out.sigma_s_sq, &out.sigma_st_sq, &out.sigma_e_sq}) {
    if (*c < floor) throw InvalidParameter("derived variance component is negative");
    if (*c < 0.0) *c = 0.0;
  }
  return out;
}

ClusterShape cluster_shape(const DesignSpec& spec, int cluster) {
  if (is_individually_randomized(spec.kind)) return {1, 1, BlockLayout::time_major};
  const Family family = family_of(spec.kind);
  return {spec.cluster_size(cluster), spec.times(),
          family == Family::cohort ? BlockLayout::subject_major : BlockLayout::time_major};
}

namespace {

struct Position {
  int subject;
  int time;
};

Position locate(const ClusterShape& shape, int index) {
  if (shape.layout == BlockLayout::subject_major) {
    return {index / shape.times, index % shape.times};
  }
  return {index % shape.subjects, index / shape.subjects};
}

double covariance(const VarianceComponents& c, Position a, Position b, bool same_observation) {
  double v = c.sigma_c_sq;
  if (a.time == b.time) v += c.sigma_ct_sq;
  if (a.subject == b.subject) v += c.sigma_s_sq;
  if (same_observation) v += c.sigma_st_sq + c.sigma_e_sq;
  return v;
}

}  // namespace

BlockCovariance build_cluster_v(const ClusterShape& shape, const VarianceComponents& comps) {
  if (shape.subjects < 1 || shape.times < 1) {
    throw InvalidParameter("cluster block needs at least one subject and one time");
  }
  if (static_cast<long>(shape.subjects) * shape.times > kMaxClusterDimension) {
    throw InvalidParameter("cluster block exceeds " + std::to_string(kMaxClusterDimension) +
                           " observations; check the design configuration");
  }
  BlockCovariance out;
  out.shape = shape;
  const int dim = shape.dimension();
  out.cluster_matrix.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const Position pi = locate(shape, i);
    for (int j = 0; j <= i; ++j) {
      const double v = covariance(comps, pi, locate(shape, j), i == j);
      out.cluster_matrix(i, j) = v;
      out.cluster_matrix(j, i) = v;
    }
  }

  if (shape.layout == BlockLayout::subject_major) {
    const int t = shape.times;
    out.a_block.resize(t, t);
    out.b_block.resize(t, t);
    for (int i = 0; i < t; ++i) {
      for (int j = 0; j < t; ++j) {
        out.a_block(i, j) = covariance(comps, {0, i}, {0, j}, i == j);
        out.b_block(i, j) = covariance(comps, {0, i}, {1, j}, false);
      }
    }
  } else {
    const int n = shape.subjects;
    out.a_block.resize(n, n);
    out.b_block.resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.a_block(i, j) = covariance(comps, {i, 0}, {j, 0}, i == j);
        // Cross-sectional subjects at different times are different people.
        out.b_block(i, j) = covariance(comps, {i, 0}, {n + j, 1}, false);
      }
    }
  }
  return out;
}

BlockCovariance build_cluster_v(const DesignSpec& spec, const VarianceComponents& comps) {
  require_valid(spec);
  return build_cluster_v(cluster_shape(spec, 0), comps);
}

Eigen::MatrixXd vcorr(const Eigen::MatrixXd& v) {
  const Eigen::VectorXd d = v.diagonal();
  if ((d.array() <= 0.0).any()) {
    throw DomainError("correlation matrix needs strictly positive variances");
  }
  const Eigen::VectorXd inv_sd = d.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd r = inv_sd.asDiagonal() * v * inv_sd.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

Eigen::MatrixXd vcorr(const BlockCovariance& v) { return vcorr(v.cluster_matrix); }

double min_eigenvalue(const Eigen::MatrixXd& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(v, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

int StudyCovariance::dimension() const {
  if (blocks.empty()) return 0;
  return offsets.back() + static_cast<int>(blocks.back().cluster_matrix.rows());
}

Eigen::MatrixXd StudyCovariance::dense() const {
  const int n = dimension();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& m = blocks[b].cluster_matrix;
    v.block(offsets[b], offsets[b], m.rows(), m.cols()) = m;
  }
  return v;
}

StudyCovariance assemble_study_v(const DesignSpec& spec, const VarianceComponents& comps) {
  require_valid(spec);
  StudyCovariance out;
  std::map<int, BlockCovariance> by_size;
  int offset = 0;
  const int clusters = spec.total_clusters();
  out.blocks.reserve(static_cast<std::size_t>(clusters));
  for (int c = 0; c < clusters; ++c) {
    const ClusterShape shape = cluster_shape(spec, c);
    auto it = by_size.find(shape.subjects);
    if (it == by_size.end()) it = by_size.emplace(shape.subjects, build_cluster_v(shape, comps)).first;
    out.blocks.push_back(it->second);
    out.offsets.push_back(offset);
    offset += shape.dimension();
  }
  return out;
}

StudyCovariance assemble_study_v(const DesignSpec& spec, const BlockCovariance& cluster_v) {
  require_valid(spec);
  StudyCovariance out;
  int offset = 0;
  for (int c = 0; c < spec.total_clusters(); ++c) {
    const ClusterShape shape = cluster_shape(spec, c);
    if (shape.subjects != cluster_v.shape.subjects || shape.times != cluster_v.shape.times) {
      throw InvalidParameter("cluster " + std::to_string(c + 1) +
                             " does not match the supplied block shape; use the component overload");
    }
    out.blocks.push_back(cluster_v);
    out.offsets.push_back(offset);
    offset += shape.dimension();
  }
  return out;
}

std::string format_matrix_fixed(const Eigen::MatrixXd& m, int decimals) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(decimals);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << '\t';
      out << m(i, j);
    }
    out << '\n';
  }
  return out.str();
}

std::string format_matrix_csv(const Eigen::MatrixXd& m) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace wedgepower
