#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wedgepower/design.hpp"

namespace wedgepower {

struct CorrelationParams {
  double sigma_y_sq = 25.0;
  double icc = 0.0;  // rho
  double cac = 1.0;  // rho_c, cluster autocorrelation
  double sac = 0.0;  // rho_s, subject autocorrelation
};

std::vector<ValidationIssue> validate_params(const CorrelationParams& params, Family family);

struct VarianceComponents {
  double sigma_c_sq = 0.0;
  double sigma_ct_sq = 0.0;
  double sigma_s_sq = 0.0;
  double sigma_st_sq = 0.0;
  double sigma_e_sq = 0.0;

  double total() const {
    return sigma_c_sq + sigma_ct_sq + sigma_s_sq + sigma_st_sq + sigma_e_sq;
  }
};

VarianceComponents derive_components(const CorrelationParams& params, Family family);

/// Ordering of observations inside a cluster block.
enum class BlockLayout {
  subject_major,  // cohort: all times of subject 1, then subject 2, ...
  time_major,     // cross-sectional: all subjects at time 1, then time 2, ...
};

struct ClusterShape {
  int subjects = 1;
  int times = 1;
  BlockLayout layout = BlockLayout::time_major;

  int dimension() const { return subjects * times; }
};

/// Shape of cluster `cluster` (0-based) in the given design.
ClusterShape cluster_shape(const DesignSpec& spec, int cluster);

inline constexpr int kMaxClusterDimension = 10000;

struct BlockCovariance {
  Eigen::MatrixXd cluster_matrix;
  ClusterShape shape;
  /// Generator blocks. Subject-major: A is times x times for one subject and
  /// B couples two different subjects. Time-major: A is subjects x subjects
  /// at one time and B couples two different times.
  Eigen::MatrixXd a_block;
  Eigen::MatrixXd b_block;
};

BlockCovariance build_cluster_v(const ClusterShape& shape, const VarianceComponents& comps);
/// Block for the first cluster of `spec`.
BlockCovariance build_cluster_v(const DesignSpec& spec, const VarianceComponents& comps);

Eigen::MatrixXd vcorr(const Eigen::MatrixXd& v);
Eigen::MatrixXd vcorr(const BlockCovariance& v);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& v);

/// Block-diagonal whole-study covariance; between-cluster entries are zero.
struct StudyCovariance {
  std::vector<BlockCovariance> blocks;
  /// Row offset of each block in the study ordering.
  std::vector<int> offsets;

  int dimension() const;
  Eigen::MatrixXd dense() const;
};

StudyCovariance assemble_study_v(const DesignSpec& spec, const VarianceComponents& comps);
/// Replicates `cluster_v` for every cluster; all clusters must share its shape.
StudyCovariance assemble_study_v(const DesignSpec& spec, const BlockCovariance& cluster_v);

// Matrix dumps.
std::string format_matrix_fixed(const Eigen::MatrixXd& m, int decimals = 1);
std::string format_matrix_csv(const Eigen::MatrixXd& m);

}  // namespace wedgepower
