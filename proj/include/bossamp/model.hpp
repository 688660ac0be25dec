#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bossamp/rng.hpp"

namespace bossamp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Zero probabilities are kept inside [kGammaEps, 1 - kGammaEps]; values at the
// endpoints would produce infinite log-likelihood ratios.
inline constexpr double kGammaEps = 1e-12;

inline double clamp_gamma(double gamma) {
  return std::min(std::max(gamma, kGammaEps), 1.0 - kGammaEps);
}

struct DegenerateSignalError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Fixed linear operator of the measurement y = A x + w.
struct SensingMatrix {
  MatrixXd entries;

  SensingMatrix() = default;

  explicit SensingMatrix(MatrixXd e) : entries(std::move(e)) {
    if (entries.rows() < 1 || entries.cols() < 1)
      throw std::invalid_argument("sensing matrix must have at least one row and one column");
    if (!entries.allFinite())
      throw std::invalid_argument("sensing matrix entries must be finite");
  }

  Index m() const { return entries.rows(); }
  Index n() const { return entries.cols(); }

  // Largest |column norm - 1|; generated matrices keep this below 1e-12.
  double max_column_norm_deviation() const {
    double worst = 0.0;
    for (Index j = 0; j < entries.cols(); ++j)
      worst = std::max(worst, std::abs(entries.col(j).norm() - 1.0));
    return worst;
  }
};

// Index groups over {0..n-1}. Usually a partition; overlapping groups are
// representable and accepted by the recovery routines.
class GroupStructure {
 public:
  GroupStructure(std::vector<std::vector<Index>> groups, Index n)
      : groups_(std::move(groups)), n_(n) {
    if (n_ < 1) throw std::invalid_argument("group structure needs n >= 1");
    std::vector<int> membership(static_cast<std::size_t>(n_), 0);
    for (const auto& group : groups_) {
      if (group.empty()) throw std::invalid_argument("groups must be non-empty");
      std::vector<Index> sorted = group;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < 0 || sorted[i] >= n_)
          throw std::invalid_argument("group index out of range");
        if (i > 0 && sorted[i] == sorted[i - 1])
          throw std::invalid_argument("indices within a group must be distinct");
      }
      for (Index idx : group) ++membership[static_cast<std::size_t>(idx)];
    }
    for (Index i = 0; i < n_; ++i)
      if (membership[static_cast<std::size_t>(i)] == 0)
        throw std::invalid_argument("every index must appear in at least one group");
    partition_ = std::all_of(membership.begin(), membership.end(),
                             [](int c) { return c == 1; });
    build_mates();
  }

  static GroupStructure contiguous(Index n, Index group_size) {
    if (n < 1 || group_size < 1 || n % group_size != 0)
      throw std::invalid_argument("group size must divide n");
    std::vector<std::vector<Index>> groups;
    groups.reserve(static_cast<std::size_t>(n / group_size));
    for (Index start = 0; start < n; start += group_size) {
      std::vector<Index> g(static_cast<std::size_t>(group_size));
      for (Index i = 0; i < group_size; ++i) g[static_cast<std::size_t>(i)] = start + i;
      groups.push_back(std::move(g));
    }
    return GroupStructure(std::move(groups), n);
  }

  static GroupStructure singletons(Index n) { return contiguous(n, 1); }

  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  Index n() const { return n_; }
  Index num_groups() const { return static_cast<Index>(groups_.size()); }
  bool is_partition() const { return partition_; }

  // Union of groupmates of index i, i excluded, each mate counted once.
  const std::vector<Index>& mates(Index i) const {
    return mates_[static_cast<std::size_t>(i)];
  }

  bool equally_sized() const {
    for (const auto& g : groups_)
      if (g.size() != groups_.front().size()) return false;
    return true;
  }

 private:
  void build_mates() {
    mates_.assign(static_cast<std::size_t>(n_), {});
    for (const auto& group : groups_)
      for (Index i : group)
        for (Index j : group)
          if (i != j) mates_[static_cast<std::size_t>(i)].push_back(j);
    for (auto& m : mates_) {
      std::sort(m.begin(), m.end());
      m.erase(std::unique(m.begin(), m.end()), m.end());
    }
  }

  std::vector<std::vector<Index>> groups_;
  Index n_ = 0;
  bool partition_ = false;
  std::vector<std::vector<Index>> mates_;
};

enum class PriorKind { SparseBinary, SparseGaussian, Generic };

// Distribution of the nonzero entries for the generic prior: an optional
// continuous density on [lower, upper] plus optional point masses.
struct NonzeroDensity {
  std::function<double(double)> pdf;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> atoms;  // (location, mass)
};

struct SignalPrior {
  PriorKind kind = PriorKind::SparseBinary;
  double sigma_x_sq = 1.0;        // SparseGaussian only
  NonzeroDensity nonzero_density; // Generic only
  VectorXd gamma0;                // per-entry zero probabilities, clamped

  static SignalPrior sparse_binary(Index n, double gamma) {
    return sparse_binary(VectorXd::Constant(n, gamma));
  }

  static SignalPrior sparse_binary(VectorXd gamma) {
    SignalPrior p;
    p.kind = PriorKind::SparseBinary;
    p.gamma0 = clamp_all(std::move(gamma));
    return p;
  }

  static SignalPrior sparse_gaussian(Index n, double gamma, double sigma_x_sq) {
    if (!(sigma_x_sq > 0.0))
      throw std::invalid_argument("sparse-gaussian prior needs sigma_x_sq > 0");
    SignalPrior p;
    p.kind = PriorKind::SparseGaussian;
    p.sigma_x_sq = sigma_x_sq;
    p.gamma0 = clamp_all(VectorXd::Constant(n, gamma));
    return p;
  }

  static SignalPrior generic(Index n, double gamma, NonzeroDensity density) {
    SignalPrior p;
    p.kind = PriorKind::Generic;
    p.nonzero_density = std::move(density);
    p.gamma0 = clamp_all(VectorXd::Constant(n, gamma));
    return p;
  }

 private:
  static VectorXd clamp_all(VectorXd g) {
    for (Index i = 0; i < g.size(); ++i) g[i] = clamp_gamma(g[i]);
    return g;
  }
};

struct ProblemInstance {
  SensingMatrix a;
  VectorXd x_true;
  VectorXd y;
  double noise_var = 0.0;
  GroupStructure groups = GroupStructure::singletons(1);
  SignalPrior prior;
  std::uint64_t seed = 0;
};

// i.i.d. standard normal entries, every column rescaled to unit l2 norm.
inline SensingMatrix gen_sensing_matrix(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("sensing matrix dimensions must be positive");
  Rng rng(seed);
  MatrixXd a(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) a(i, j) = rng.gaussian();
    const double norm = a.col(j).norm();
    if (norm == 0.0) throw std::runtime_error("degenerate all-zero column while sampling");
    a.col(j) /= norm;
  }
  return SensingMatrix(std::move(a));
}

inline GroupStructure gen_group_structure(Index n, Index group_size) {
  return GroupStructure::contiguous(n, group_size);
}

namespace detail {

inline std::vector<Index> choose_active_groups(Index num_groups, Index count, Rng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(num_groups));
  for (Index i = 0; i < num_groups; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < count; ++i) {
    const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(num_groups - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> active(pool.begin(), pool.begin() + count);
  std::sort(active.begin(), active.end());
  return active;
}

inline VectorXd fill_signal(const GroupStructure& groups, const std::vector<Index>& active,
                            const SignalPrior& prior, Rng& rng) {
  VectorXd x = VectorXd::Zero(groups.n());
  const double sigma_x = std::sqrt(prior.sigma_x_sq);
  for (Index g : active) {
    for (Index idx : groups.groups()[static_cast<std::size_t>(g)]) {
      x[idx] = prior.kind == PriorKind::SparseBinary ? 1.0 : sigma_x * rng.gaussian();
    }
  }
  return x;
}

}  // namespace detail

// Chooses k/|group| active groups uniformly without replacement and fills them
// per the prior; all remaining entries are exactly zero.
inline VectorXd gen_signal(const GroupStructure& groups, Index k, const SignalPrior& prior,
                           std::uint64_t seed) {
  if (prior.kind == PriorKind::Generic)
    throw std::invalid_argument("no signal generator for generic priors");
  if (!groups.is_partition() || !groups.equally_sized())
    throw std::invalid_argument("signal generator requires equally-sized non-overlapping groups");
  const Index group_size = static_cast<Index>(groups.groups().front().size());
  if (k < 0 || k > groups.n() || k % group_size != 0)
    throw std::invalid_argument("k must be a multiple of the group size and at most n");
  Rng rng(seed);
  const auto active = detail::choose_active_groups(groups.num_groups(), k / group_size, rng);
  return detail::fill_signal(groups, active, prior, rng);
}

// Noise variance realizing the requested linear SNR = ||Ax||^2 / (M sigma_w^2).
inline double calibrate_noise(const SensingMatrix& a, const VectorXd& x, double snr) {
  if (!(snr > 0.0)) throw std::invalid_argument("snr must be positive");
  const double signal_energy = (a.entries * x).squaredNorm();
  if (!(signal_energy > 0.0))
    throw DegenerateSignalError("cannot calibrate noise for a signal with zero measurement energy");
  if (std::isinf(snr)) return 0.0;
  return signal_energy / (static_cast<double>(a.m()) * snr);
}

inline double snr_db_to_linear(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return std::numeric_limits<double>::infinity();
  return std::pow(10.0, snr_db / 10.0);
}

inline SignalPrior make_prior(PriorKind kind, Index n, Index k, double sigma_x_sq) {
  const double gamma = 1.0 - static_cast<double>(k) / static_cast<double>(n);
  switch (kind) {
    case PriorKind::SparseBinary:
      return SignalPrior::sparse_binary(n, gamma);
    case PriorKind::SparseGaussian:
      return SignalPrior::sparse_gaussian(n, gamma, sigma_x_sq);
    default:
      throw std::invalid_argument("generic priors cannot be built from (n, k) alone");
  }
}

// Complete problem instance; sub-seeds for matrix, signal and noise are
// derived independently so that realizations can be generated in any order.
// snr_db = +infinity is the noiseless sentinel: sigma_w^2 = 0 and y = Ax.
inline ProblemInstance make_instance(Index m, Index n, Index k, Index group_size, PriorKind kind,
                                     double snr_db, std::uint64_t seed, double sigma_x_sq = 1.0) {
  ProblemInstance inst;
  inst.seed = seed;
  inst.a = gen_sensing_matrix(m, n, derive_seed(seed, SeedRole::Matrix, 0));
  inst.groups = gen_group_structure(n, group_size);
  inst.prior = make_prior(kind, n, k, sigma_x_sq);
  inst.x_true = gen_signal(inst.groups, k, inst.prior, derive_seed(seed, SeedRole::Signal, 0));
  const double snr = snr_db_to_linear(snr_db);
  inst.noise_var = std::isinf(snr) ? 0.0 : calibrate_noise(inst.a, inst.x_true, snr);
  inst.y = inst.a.entries * inst.x_true;
  if (inst.noise_var > 0.0) {
    Rng noise_rng(derive_seed(seed, SeedRole::Noise, 0));
    const double sigma_w = std::sqrt(inst.noise_var);
    for (Index i = 0; i < m; ++i) inst.y[i] += sigma_w * noise_rng.gaussian();
  }
  return inst;
}

// B measurement blocks sharing one support; per-block values, noise and
// (optionally) matrices are drawn from independent sub-streams.
struct JointProblemInstance {
  std::vector<SensingMatrix> as;  // size 1 when shared, else one per block
  std::vector<VectorXd> xs;
  std::vector<VectorXd> ys;
  std::vector<double> noise_vars;
  GroupStructure groups = GroupStructure::singletons(1);
  SignalPrior prior;
  std::uint64_t seed = 0;
};

inline JointProblemInstance make_joint_instance(Index m, Index n, Index k, Index group_size,
                                                PriorKind kind, double snr_db, std::uint64_t seed,
                                                Index blocks, bool shared_matrix,
                                                double sigma_x_sq = 1.0) {
  if (blocks < 1) throw std::invalid_argument("need at least one block");
  JointProblemInstance inst;
  inst.seed = seed;
  inst.groups = gen_group_structure(n, group_size);
  inst.prior = make_prior(kind, n, k, sigma_x_sq);
  if (k % group_size != 0 || k > n)
    throw std::invalid_argument("k must be a multiple of the group size and at most n");

  Rng support_rng(derive_seed(seed, SeedRole::Signal, 0));
  const auto active =
      detail::choose_active_groups(inst.groups.num_groups(), k / group_size, support_rng);

  const double snr = snr_db_to_linear(snr_db);
  const Index num_matrices = shared_matrix ? 1 : blocks;
  for (Index b = 0; b < num_matrices; ++b)
    inst.as.push_back(gen_sensing_matrix(m, n, derive_seed(seed, SeedRole::Matrix, b)));

  for (Index b = 0; b < blocks; ++b) {
    Rng value_rng(derive_seed(seed, SeedRole::SignalValues, b));
    VectorXd x = detail::fill_signal(inst.groups, active, inst.prior, value_rng);
    const SensingMatrix& a = inst.as[shared_matrix ? 0 : static_cast<std::size_t>(b)];
    const double noise_var = std::isinf(snr) ? 0.0 : calibrate_noise(a, x, snr);
    VectorXd y = a.entries * x;
    if (noise_var > 0.0) {
      Rng noise_rng(derive_seed(seed, SeedRole::Noise, b));
      const double sigma_w = std::sqrt(noise_var);
      for (Index i = 0; i < m; ++i) y[i] += sigma_w * noise_rng.gaussian();
    }
    inst.xs.push_back(std::move(x));
    inst.ys.push_back(std::move(y));
    inst.noise_vars.push_back(noise_var);
  }
  return inst;
}

}  // namespace bossamp
