#include "wedgepower/design.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace wedgepower {

namespace {

constexpr std::array<std::pair<DesignKind, std::string_view>, 7> kKindNames{{
    {DesignKind::rct_post, "rct_post"},
    {DesignKind::crt_post, "crt_post"},
    {DesignKind::rct_prepost, "rct_prepost"},
    {DesignKind::crt_prepost_xsec, "crt_prepost_xsec"},
    {DesignKind::crt_prepost_cohort, "crt_prepost_cohort"},
    {DesignKind::swd_xsec, "swd_xsec"},
    {DesignKind::swd_cohort, "swd_cohort"},
}};

std::size_t expected_means(DesignKind kind) {
  switch (kind) {
    case DesignKind::rct_prepost:
    case DesignKind::crt_prepost_xsec:
    case DesignKind::crt_prepost_cohort:
      return 4;
    default:
      return 2;
  }
}

bool is_prepost(DesignKind kind) { return expected_means(kind) == 4; }

int sum_of(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }

// Last time point (1-based) a cluster in `step` spends under control.
int last_control_time(const DesignSpec& spec, int step) {
  return spec.baseline_b + (step - 1) * spec.per_step_t;
}

}  // namespace

std::string_view to_string(DesignKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<DesignKind> parse_design_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

Family family_of(DesignKind kind) {
  switch (kind) {
    case DesignKind::rct_post:
    case DesignKind::crt_post:
      return Family::single_measurement;
    case DesignKind::rct_prepost:
    case DesignKind::crt_prepost_xsec:
    case DesignKind::swd_xsec:
      return Family::cross_sectional;
    case DesignKind::crt_prepost_cohort:
    case DesignKind::swd_cohort:
      return Family::cohort;
  }
  return Family::single_measurement;
}

bool is_stepped_wedge(DesignKind kind) {
  return kind == DesignKind::swd_xsec || kind == DesignKind::swd_cohort;
}

bool is_individually_randomized(DesignKind kind) {
  return kind == DesignKind::rct_post || kind == DesignKind::rct_prepost;
}

int DesignSpec::times() const {
  if (is_stepped_wedge(kind)) return baseline_b + steps_k * per_step_t;
  return is_prepost(kind) ? 2 : 1;
}

int DesignSpec::total_clusters() const {
  switch (kind) {
    case DesignKind::rct_post:
      return 2 * per_group_n;
    case DesignKind::rct_prepost:
      return 4 * per_group_n;
    case DesignKind::swd_xsec:
    case DesignKind::swd_cohort:
      return sum_of(clusters_per_step);
    default:
      return sum_of(clusters_per_arm);
  }
}

int DesignSpec::cluster_size(int cluster) const {
  if (is_individually_randomized(kind)) return 1;
  if (cluster_sizes.size() == 1) return cluster_sizes.front();
  return cluster_sizes.at(static_cast<std::size_t>(cluster));
}

double DesignSpec::mean_cluster_size() const {
  if (is_individually_randomized(kind)) return 1.0;
  const int clusters = total_clusters();
  if (cluster_sizes.size() == 1 || clusters == 0) return cluster_sizes.empty() ? 0.0 : cluster_sizes.front();
  double total = 0.0;
  for (int c = 0; c < clusters; ++c) total += cluster_size(c);
  return total / clusters;
}

std::vector<ValidationIssue> validate_spec(const DesignSpec& spec) {
  std::vector<ValidationIssue> issues;
  auto fail = [&](std::string path, std::string message) {
    issues.push_back({std::move(path), std::move(message)});
  };
  auto counts_at_least_one = [&](const std::vector<int>& v, const std::string& path) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 1) fail(path + "[" + std::to_string(i) + "]", "count must be >= 1");
    }
  };

  const std::size_t want_means = expected_means(spec.kind);
  if (spec.means.size() != want_means) {
    fail("design.means", "expected " + std::to_string(want_means) + " cell means, got " +
                             std::to_string(spec.means.size()));
  }
  for (std::size_t i = 0; i < spec.means.size(); ++i) {
    if (!std::isfinite(spec.means[i])) fail("design.means[" + std::to_string(i) + "]", "must be finite");
  }
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) fail("analysis.alpha", "must lie in (0, 1)");

  if (is_individually_randomized(spec.kind)) {
    if (spec.per_group_n < 1) fail("design.per_group_n", "count must be >= 1");
    return issues;
  }

  if (is_stepped_wedge(spec.kind)) {
    if (spec.steps_k < 1) fail("design.steps_k", "count must be >= 1");
    if (spec.baseline_b < 1) fail("design.baseline_b", "count must be >= 1");
    if (spec.per_step_t < 1) fail("design.per_step_t", "count must be >= 1");
    if (spec.steps_k >= 1 && static_cast<int>(spec.clusters_per_step.size()) != spec.steps_k) {
      fail("design.clusters_per_step", "schedule length mismatch: " +
                                           std::to_string(spec.clusters_per_step.size()) +
                                           " entries for steps_k = " + std::to_string(spec.steps_k));
    }
    if (spec.clusters_per_step.empty()) fail("design.clusters_per_step", "must not be empty");
    counts_at_least_one(spec.clusters_per_step, "design.clusters_per_step");
  } else {
    if (spec.clusters_per_arm.size() != 2) {
      fail("design.clusters_per_arm", "expected one cluster count for each of 2 arms");
    }
    counts_at_least_one(spec.clusters_per_arm, "design.clusters_per_arm");
  }

  if (spec.cluster_sizes.empty()) {
    fail("design.cluster_size", "must be given");
  } else {
    counts_at_least_one(spec.cluster_sizes, "design.cluster_size");
    const int clusters = spec.total_clusters();
    if (spec.cluster_sizes.size() != 1 && static_cast<int>(spec.cluster_sizes.size()) != clusters) {
      fail("design.cluster_size", "per-cluster list has " + std::to_string(spec.cluster_sizes.size()) +
                                      " entries for " + std::to_string(clusters) + " clusters");
    }
    const int times = spec.times();
    for (int size : spec.cluster_sizes) {
      if (size >= 1 && times >= 1 && static_cast<long>(size) * times > 10000) {
        fail("design.cluster_size", "cluster block exceeds 10000 observations");
        break;
      }
    }
  }
  return issues;
}

void require_valid(const DesignSpec& spec) {
  auto issues = validate_spec(spec);
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

Eigen::VectorXd ExemplaryDataset::mean_vector() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].mean;
  return y;
}

ExemplaryDataset exemplary_dataset(const DesignSpec& spec) {
  require_valid(spec);
  ExemplaryDataset data;
  data.kind = spec.kind;
  auto& rows = data.rows;
  const auto& means = spec.means;
  int cluster_id = 0;
  int subject_id = 0;

  switch (spec.kind) {
    case DesignKind::rct_post:
      for (int arm = 0; arm < 2; ++arm) {
        for (int s = 0; s < spec.per_group_n; ++s) {
          ++subject_id;
          rows.push_back({arm, subject_id, subject_id, 1, arm, means[arm]});
        }
      }
      break;

    case DesignKind::rct_prepost:
      for (int arm = 0; arm < 2; ++arm) {
        for (int time = 1; time <= 2; ++time) {
          for (int s = 0; s < spec.per_group_n; ++s) {
            ++subject_id;
            const int intervene = arm == 1 && time == 2 ? 1 : 0;
            rows.push_back({arm, subject_id, subject_id, time, intervene, means[2 * arm + time - 1]});
          }
        }
      }
      break;

    case DesignKind::crt_post:
      for (int arm = 0; arm < 2; ++arm) {
        for (int c = 0; c < spec.clusters_per_arm[arm]; ++c) {
          const int size = spec.cluster_size(cluster_id);
          ++cluster_id;
          for (int p = 0; p < size; ++p) {
            ++subject_id;
            rows.push_back({arm, cluster_id, subject_id, 1, arm, means[arm]});
          }
        }
      }
      break;

    case DesignKind::crt_prepost_xsec:
    case DesignKind::crt_prepost_cohort: {
      const bool cohort = spec.kind == DesignKind::crt_prepost_cohort;
      for (int arm = 0; arm < 2; ++arm) {
        for (int c = 0; c < spec.clusters_per_arm[arm]; ++c) {
          const int size = spec.cluster_size(cluster_id);
          ++cluster_id;
          auto emit = [&](int time, int subject) {
            const int intervene = arm == 1 && time == 2 ? 1 : 0;
            rows.push_back({arm, cluster_id, subject, time, intervene, means[2 * arm + time - 1]});
          };
          if (cohort) {
            for (int p = 0; p < size; ++p) {
              ++subject_id;
              for (int time = 1; time <= 2; ++time) emit(time, subject_id);
            }
          } else {
            for (int time = 1; time <= 2; ++time) {
              for (int p = 0; p < size; ++p) emit(time, ++subject_id);
            }
          }
        }
      }
      break;
    }

    case DesignKind::swd_xsec:
    case DesignKind::swd_cohort: {
      const bool cohort = spec.kind == DesignKind::swd_cohort;
      const int times = spec.times();
      for (int step = 1; step <= spec.steps_k; ++step) {
        const int switch_after = last_control_time(spec, step);
        for (int c = 0; c < spec.clusters_per_step[step - 1]; ++c) {
          const int size = spec.cluster_size(cluster_id);
          ++cluster_id;
          auto emit = [&](int time, int subject) {
            const int intervene = time > switch_after ? 1 : 0;
            rows.push_back({step, cluster_id, subject, time, intervene, means[intervene]});
          };
          if (cohort) {
            for (int s = 0; s < size; ++s) {
              ++subject_id;
              for (int time = 1; time <= times; ++time) emit(time, subject_id);
            }
          } else {
            for (int time = 1; time <= times; ++time) {
              for (int s = 0; s < size; ++s) emit(time, ++subject_id);
            }
          }
        }
      }
      break;
    }
  }
  return data;
}

int matrix_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

DesignMatrix design_matrix(const DesignSpec& spec) {
  return design_matrix(spec, exemplary_dataset(spec));
}

DesignMatrix design_matrix(const DesignSpec& spec, const ExemplaryDataset& data) {
  DesignMatrix out;
  const auto n = static_cast<Eigen::Index>(data.rows.size());
  auto& names = out.column_names;
  auto& terms = out.terms;

  terms.push_back({"intercept", 0, 1, false, false, true});
  names.emplace_back("intercept");

  if (is_stepped_wedge(spec.kind)) {
    const int times = spec.times();
    terms.push_back({"time", 1, times - 1, false, true, true});
    for (int t = 2; t <= times; ++t) names.push_back("time" + std::to_string(t));
    // The treatment indicator enters as a numeric covariate.
    terms.push_back({"intervene", times, 1, false, false, false});
    names.emplace_back("intervene");

    out.x = Eigen::MatrixXd::Zero(n, times + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = data.rows[static_cast<std::size_t>(i)];
      out.x(i, 0) = 1.0;
      if (row.time >= 2) out.x(i, row.time - 1) = 1.0;
      out.x(i, times) = row.intervene;
    }
  } else if (is_prepost(spec.kind)) {
    terms.push_back({"arm", 1, 1, true, false, true});
    terms.push_back({"time", 2, 1, false, true, true});
    terms.push_back({"arm:time", 3, 1, true, true, true});
    names.insert(names.end(), {"arm", "time", "arm:time"});
    out.x = Eigen::MatrixXd::Zero(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = data.rows[static_cast<std::size_t>(i)];
      const double arm = row.arm;
      const double time = row.time == 2 ? 1.0 : 0.0;
      out.x.row(i) << 1.0, arm, time, arm * time;
    }
  } else {
    terms.push_back({"arm", 1, 1, true, false, true});
    names.emplace_back("arm");
    out.x = Eigen::MatrixXd::Zero(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.x.row(i) << 1.0, static_cast<double>(data.rows[static_cast<std::size_t>(i)].arm);
    }
  }

  const int rank = matrix_rank(out.x);
  if (rank < out.x.cols()) {
    throw InvalidParameter("design matrix is rank deficient (rank " + std::to_string(rank) + " of " +
                           std::to_string(out.x.cols()) +
                           " columns); the schedule confounds treatment with time");
  }
  return out;
}

HypothesisContrast hypothesis_contrast(const DesignSpec& spec) {
  HypothesisContrast out;
  int columns = 2;
  if (is_stepped_wedge(spec.kind)) {
    columns = spec.times() + 1;
    out.label = "intervene";
  } else if (is_prepost(spec.kind)) {
    columns = 4;
    out.label = "arm:time";
  } else {
    out.label = "arm";
  }
  out.l = Eigen::MatrixXd::Zero(1, columns);
  out.l(0, columns - 1) = 1.0;
  return out;
}

std::string dataset_to_csv(const ExemplaryDataset& data) {
  std::ostringstream out;
  out << kDatasetCsvHeader << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const std::string_view name = to_string(data.kind);
  for (const auto& r : data.rows) {
    out << name << ',' << r.arm << ',' << r.cluster_id << ',' << r.subject_id << ',' << r.time << ','
        << r.intervene << ',' << r.mean << '\n';
  }
  return out.str();
}

ExemplaryDataset dataset_from_csv(std::string_view text) {
  ExemplaryDataset data;
  std::size_t pos = 0;
  bool header = true;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      if (line != kDatasetCsvHeader) throw InvalidParameter("unexpected dataset CSV header");
      header = false;
      continue;
    }
    std::array<std::string_view, 7> fields;
    std::size_t start = 0;
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const std::size_t comma = f + 1 < fields.size() ? line.find(',', start) : line.size();
      if (comma == std::string_view::npos) {
        throw InvalidParameter("dataset CSV line " + std::to_string(line_no) + " has too few fields");
      }
      fields[f] = line.substr(start, comma - start);
      start = comma + 1;
    }
    auto kind = parse_design_kind(fields[0]);
    if (!kind) throw InvalidParameter("dataset CSV line " + std::to_string(line_no) + ": unknown design");
    data.kind = *kind;
    DatasetRow row;
    auto to_int = [&](std::string_view s, int& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw InvalidParameter("dataset CSV line " + std::to_string(line_no) + ": bad integer");
      }
    };
    to_int(fields[1], row.arm);
    to_int(fields[2], row.cluster_id);
    to_int(fields[3], row.subject_id);
    to_int(fields[4], row.time);
    to_int(fields[5], row.intervene);
    row.mean = std::stod(std::string(fields[6]));
    data.rows.push_back(row);
  }
  return data;
}

}  // namespace wedgepower
