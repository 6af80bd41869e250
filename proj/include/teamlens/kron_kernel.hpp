#pragma once

#include <optional>

#include <Eigen/Dense>

#include "teamlens/error.hpp"
#include "teamlens/network.hpp"

namespace teamlens {

/// Row-major storage makes the pair-space reshape a plain Map:
/// coordinate (i, i') of a Kronecker-space vector lives at i*m' + i'.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct KernelParams {
  double c = 0.1;
  double tol = 1e-10;
  int max_iter = 1000;
  // Start/stop distributions per graph; uniform (1/m) when unset.
  std::optional<Eigen::VectorXd> start;
  std::optional<Eigen::VectorXd> stop;
  std::optional<Eigen::VectorXd> start_prime;
  std::optional<Eigen::VectorXd> stop_prime;
};

/// Throws InvalidParams unless 0 < c < 1, tol > 0 and max_iter >= 1.
void validate(const KernelParams& params);

/// Fully specified two-graph problem. Distributions are taken as given, so
/// tests may scale or perturb them freely.
struct PairInputs {
  Eigen::MatrixXd W, Wp;
  Eigen::MatrixXd L, Lp;
  Eigen::VectorXd p, pp;
  Eigen::VectorXd q, qp;
  double c = 0.1;

  static PairInputs from_teams(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params);

  Eigen::Index m() const noexcept { return W.rows(); }
  Eigen::Index mp() const noexcept { return Wp.rows(); }
  Eigen::Index pair_count() const noexcept { return W.rows() * Wp.rows(); }
  Eigen::MatrixXd overlap() const;
  /// vec(p p'^T)
  Eigen::VectorXd start_pairs() const;
  /// vec(q q'^T)
  Eigen::VectorXd stop_pairs() const;
  /// Same problem with the two graphs exchanged.
  PairInputs swapped() const;
};

/// x -> c * L_x * (W kron W') * x, never materialized.
class KronOperator {
 public:
  KronOperator(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Wp, const Eigen::MatrixXd& S, double c);
  explicit KronOperator(const PairInputs& in);

  Eigen::Index m() const noexcept { return W_.rows(); }
  Eigen::Index mp() const noexcept { return Wp_.rows(); }
  Eigen::Index size() const noexcept { return W_.rows() * Wp_.rows(); }
  double decay() const noexcept { return c_; }

  /// c * vec(S o (W X W'^T)). OpenMP over output rows.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// c * vec(W^T (S o X) W'). OpenMP over output rows.
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;
  /// c * vec(W X W'^T), the walk step without label weighting.
  Eigen::VectorXd apply_walk(const Eigen::VectorXd& x) const;

  /// Serial Eigen-expression versions of the above, kept as references.
  Eigen::VectorXd apply_reference(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose_reference(const Eigen::VectorXd& x) const;

  /// Infinity-norm bound on the spectral radius of c * L_x * W_x.
  double spectral_radius_bound() const;

 private:
  void check_length(const Eigen::VectorXd& x) const;

  RowMatrix W_;
  RowMatrix Wp_;
  RowMatrix S_;
  double c_;
};

struct SolveReport {
  Eigen::VectorXd solution;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& message, SolveReport report)
      : Error(ErrorCode::NotConverged, message), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

/// z = (I - c L_x W_x)^{-1} b by fixed-point iteration z <- b + A z.
SolveReport solve_right(const KronOperator& op, const Eigen::VectorXd& b, double tol, int max_iter);
/// u = (I - c L_x W_x)^{-T} b, same iteration with the transposed map.
SolveReport solve_left(const KronOperator& op, const Eigen::VectorXd& b, double tol, int max_iter);

/// Throws ConvergenceRisk when the operator bound is not below one.
void require_contraction(const KronOperator& op);

/// q_x^T (I - c L_x W_x)^{-1} L_x p_x.
double kernel(const PairInputs& in, double tol, int max_iter);
double kernel(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params);

}  // namespace teamlens
