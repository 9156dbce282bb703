#include "wedgepower/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

namespace wedgepower {

namespace {

// Independent generator for (seed, replicate); no state is shared between
// replicates, so evaluation order cannot change any draw.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

Eigen::MatrixXd square_root_factor(const Eigen::MatrixXd& block) {
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // Singular but PSD blocks (e.g. perfect subject autocorrelation) still
  // admit a symmetric square root.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
  const double floor = -1e-9 * std::max(1.0, block.diagonal().maxCoeff());
  if (eig.eigenvalues().minCoeff() < floor) {
    throw InvalidParameter("cluster covariance is not positive semidefinite");
  }
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

std::pair<double, double> wilson_interval(long successes, long trials) {
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = successes / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace

ReplicateSampler::ReplicateSampler(Eigen::VectorXd mean, const StudyCovariance& v) : mean_(std::move(mean)) {
  if (v.dimension() != mean_.size()) throw InvalidParameter("mean and covariance dimensions differ");
  std::vector<const Eigen::MatrixXd*> distinct;
  for (std::size_t b = 0; b < v.blocks.size(); ++b) {
    const Eigen::MatrixXd& block = v.blocks[b].cluster_matrix;
    std::size_t k = 0;
    while (k < distinct.size() && !(distinct[k]->rows() == block.rows() && *distinct[k] == block)) ++k;
    if (k == distinct.size()) {
      distinct.push_back(&block);
      factors_.push_back(square_root_factor(block));
    }
    block_of_cluster_.push_back(static_cast<int>(k));
    offsets_.push_back(v.offsets[b]);
  }
}

void ReplicateSampler::sample_into(std::uint64_t seed, std::uint64_t replicate, Eigen::VectorXd& y) const {
  auto rng = substream(seed, replicate);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  y = mean_;
  for (std::size_t c = 0; c < offsets_.size(); ++c) {
    const Eigen::MatrixXd& factor = factors_[static_cast<std::size_t>(block_of_cluster_[c])];
    const auto m = factor.rows();
    y.segment(offsets_[c], m).noalias() += factor * z.segment(offsets_[c], m);
  }
}

Eigen::VectorXd ReplicateSampler::sample(std::uint64_t seed, std::uint64_t replicate) const {
  Eigen::VectorXd y;
  sample_into(seed, replicate, y);
  return y;
}

Eigen::VectorXd sample_replicate(const DesignSpec& spec, const VarianceComponents& comps, std::uint64_t seed,
                                 std::uint64_t replicate) {
  const ExemplaryDataset data = exemplary_dataset(spec);
  return ReplicateSampler(data.mean_vector(), assemble_study_v(spec, comps)).sample(seed, replicate);
}

std::optional<unsigned> threads_from_env() {
  const char* raw = std::getenv("WEDGEPOWER_THREADS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 1) return std::nullopt;
  return static_cast<unsigned>(value);
}

EmpiricalPower empirical_power(const SimulationPlan& plan) {
  if (plan.replicates < 1) throw DomainError("replicates must be >= 1");
  require_valid(plan.spec);
  const DdfPolicy policy = plan.policy.value_or(default_ddf_policy(plan.spec.kind));

  const ExemplaryDataset data = exemplary_dataset(plan.spec);
  const DesignMatrix dm = design_matrix(plan.spec, data);
  const HypothesisContrast contrast = hypothesis_contrast(plan.spec);
  const VarianceComponents comps = derive_components(plan.params, family_of(plan.spec.kind));
  const StudyCovariance v = assemble_study_v(plan.spec, comps);

  // Analysis uses the true correlation structure, as the analytic engine does.
  const GlsOperator gls(dm.x, v);
  const WaldStatistic wald(contrast.l, gls.beta_covariance());
  const ReplicateSampler sampler(data.mean_vector(), v);
  const auto n = static_cast<Eigen::Index>(v.dimension());
  const Eigen::Index p = dm.x.cols();

  EmpiricalPower out;
  out.ndf = wald.ndf();
  out.ddf = resolve_ddf(plan.spec, policy);
  out.fcrit = central_f_quantile(1.0 - plan.spec.alpha, out.ndf, out.ddf);
  if (plan.scale == ScaleMode::estimated && out.ddf > n - p) {
    throw InvalidParameter("ddf exceeds the residual dimension N - rank(X)");
  }

  // Whitening L_c^-1 per cluster and a QR of the whitened X. Coordinates
  // p .. p+ddf-1 of Q' L^-1 y are iid N(0, 1) and independent of beta-hat, so
  // their mean square is a chi-square(ddf)/ddf scale estimate.
  std::vector<Eigen::MatrixXd> chol;
  chol.reserve(v.blocks.size());
  Eigen::MatrixXd wx(n, p);
  for (std::size_t b = 0; b < v.blocks.size(); ++b) {
    Eigen::LLT<Eigen::MatrixXd> llt(v.blocks[b].cluster_matrix);
    if (llt.info() != Eigen::Success) throw InvalidParameter("cluster covariance is not positive definite");
    chol.emplace_back(llt.matrixL());
    const auto m = chol.back().rows();
    wx.middleRows(v.offsets[b], m) =
        chol.back().triangularView<Eigen::Lower>().solve(dm.x.middleRows(v.offsets[b], m));
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(wx);
  auto scale_estimate = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd w(n);
    for (std::size_t b = 0; b < chol.size(); ++b) {
      const auto m = chol[b].rows();
      w.segment(v.offsets[b], m) = chol[b].triangularView<Eigen::Lower>().solve(y.segment(v.offsets[b], m));
    }
    const Eigen::VectorXd t = qr.householderQ().adjoint() * w;
    return t.segment(p, out.ddf).squaredNorm() / out.ddf;
  };
  out.replicates = plan.replicates;

  unsigned threads = plan.threads;
  if (threads == 0) threads = threads_from_env().value_or(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<unsigned>(std::min<long>(threads, plan.replicates));

  std::vector<unsigned char> rejected(static_cast<std::size_t>(plan.replicates), 0);
  auto work = [&](long begin, long end) {
    Eigen::VectorXd y;
    for (long r = begin; r < end; ++r) {
      sampler.sample_into(plan.seed, static_cast<std::uint64_t>(r), y);
      double f = wald.fvalue(gls.fit(y));
      if (plan.scale == ScaleMode::estimated) f /= scale_estimate(y);
      rejected[static_cast<std::size_t>(r)] = f > out.fcrit ? 1 : 0;
    }
  };
  if (threads <= 1) {
    work(0, plan.replicates);
  } else {
    std::vector<std::jthread> pool;
    const long chunk = (plan.replicates + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const long begin = static_cast<long>(t) * chunk;
      const long end = std::min(plan.replicates, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  for (unsigned char hit : rejected) out.rejections += hit;
  out.estimate = static_cast<double>(out.rejections) / static_cast<double>(out.replicates);
  out.mc_stderr = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(out.replicates));
  out.ci95 = wilson_interval(out.rejections, out.replicates);
  return out;
}

}  // namespace wedgepower
