#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wedgepower/errors.hpp"

namespace wedgepower {

enum class DesignKind {
  rct_post,
  crt_post,
  rct_prepost,
  crt_prepost_xsec,
  crt_prepost_cohort,
  swd_xsec,
  swd_cohort,
};

/// How repeated measurements relate inside a cluster.
enum class Family {
  single_measurement,  // one observation per subject, one time
  cross_sectional,     // fresh subjects at every time
  cohort,              // same subjects at every time
};

std::string_view to_string(DesignKind kind);
std::optional<DesignKind> parse_design_kind(std::string_view name);
Family family_of(DesignKind kind);
bool is_stepped_wedge(DesignKind kind);
/// Individually randomized kinds: every subject is its own singleton cluster.
bool is_individually_randomized(DesignKind kind);

/// Declarative description of one trial design and its hypothesized means.
///
/// Mean layout per kind:
///   rct_post, crt_post           -> {arm 1, arm 2}
///   rct_prepost, crt_prepost_*   -> {arm1/t1, arm1/t2, arm2/t1, arm2/t2}
///   swd_*                        -> {control, intervention}
struct DesignSpec {
  DesignKind kind = DesignKind::rct_post;

  // Two-arm kinds.
  std::vector<int> clusters_per_arm;
  int per_group_n = 0;  // rct kinds: subjects per arm (per arm-time cell for pre-post)

  // Either one size shared by every cluster, or one entry per cluster in
  // generation order (arm-major, or step-major for stepped wedge).
  std::vector<int> cluster_sizes;

  // Stepped wedge schedule.
  int steps_k = 0;
  int baseline_b = 0;
  int per_step_t = 0;
  std::vector<int> clusters_per_step;

  std::vector<double> means;
  double alpha = 0.05;

  int times() const;
  int total_clusters() const;
  /// Subjects per cluster at one time point for the given cluster (0-based).
  int cluster_size(int cluster) const;
  double mean_cluster_size() const;
};

/// Every invariant violation found, with field paths. Empty means valid.
std::vector<ValidationIssue> validate_spec(const DesignSpec& spec);
/// Throws ValidationError listing every issue.
void require_valid(const DesignSpec& spec);

struct DatasetRow {
  int arm = 0;  // 0/1 arm indicator; sequence (step) number for stepped wedge
  int cluster_id = 0;
  int subject_id = 0;
  int time = 1;
  int intervene = 0;
  double mean = 0.0;
};

struct ExemplaryDataset {
  DesignKind kind = DesignKind::rct_post;
  std::vector<DatasetRow> rows;

  Eigen::VectorXd mean_vector() const;
};

ExemplaryDataset exemplary_dataset(const DesignSpec& spec);

/// A model term occupying a contiguous run of design-matrix columns.
struct ModelTerm {
  std::string name;
  int first_column = 0;
  int columns = 1;
  bool uses_arm = false;
  bool uses_time = false;
  /// Built from classification variables (as opposed to a numeric covariate).
  bool classification = true;
};

struct DesignMatrix {
  Eigen::MatrixXd x;
  std::vector<ModelTerm> terms;
  std::vector<std::string> column_names;
};

/// Throws InvalidParameter when X is not of full column rank.
DesignMatrix design_matrix(const DesignSpec& spec);
DesignMatrix design_matrix(const DesignSpec& spec, const ExemplaryDataset& data);

struct HypothesisContrast {
  Eigen::MatrixXd l;
  std::string label;
};

HypothesisContrast hypothesis_contrast(const DesignSpec& spec);

/// Numerical rank with a relative threshold on the pivoted QR diagonal.
int matrix_rank(const Eigen::MatrixXd& m);

// CSV export: header, one line per row, LF endings.
inline constexpr std::string_view kDatasetCsvHeader =
    "design,arm,cluster_id,subject_id,time,intervene,mean";
std::string dataset_to_csv(const ExemplaryDataset& data);
/// Parses the CSV produced by dataset_to_csv.
ExemplaryDataset dataset_from_csv(std::string_view text);

}  // namespace wedgepower
