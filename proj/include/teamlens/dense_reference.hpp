#pragma once

// Literal dense evaluation of the kernel and its derivatives. Everything here
// materializes the (m*m')x(m*m') Kronecker system and is meant for checking the
// structured fast paths at small sizes; it shares no code with them beyond the
// input containers.

#include <Eigen/Dense>

#include "teamlens/kron_kernel.hpp"
#include "teamlens/network.hpp"

namespace teamlens {

/// Largest m*m' the dense routines accept.
inline constexpr Eigen::Index kOracleMaxPairs = 4096;

enum class GraphSide { Before, After };

/// Materialized system with (I - c L_x W_x) factored once.
class DenseSystem {
 public:
  explicit DenseSystem(const PairInputs& in);

  Eigen::Index pair_count() const noexcept { return n_; }
  const Eigen::MatrixXd& walk() const noexcept { return Wx_; }
  const Eigen::VectorXd& labels() const noexcept { return Lx_; }

  /// R y
  Eigen::VectorXd resolve(const Eigen::VectorXd& y) const;
  /// R^T y
  Eigen::VectorXd resolve_transpose(const Eigen::VectorXd& y) const;

  double kernel() const;
  /// c q_x^T R L_x (dW_x) R L_x p_x for one symmetric edge perturbation.
  double edge_influence(GraphSide side, Eigen::Index i, Eigen::Index j) const;
  /// q_x^T R (dL_x / dL_k(i)) (I + c W_x R L_x) p_x
  double attribute_influence(GraphSide side, Eigen::Index i, Eigen::Index k) const;

  /// Every edge slot (unmasked, both sides) and every attribute entry, one
  /// literal evaluation each.
  struct AllInfluences {
    double kernel = 0.0;
    Eigen::MatrixXd edge_before, edge_after;
    Eigen::MatrixXd attr_before, attr_after;
  };
  AllInfluences all_influences() const;

  /// Spectral radius of c L_x W_x from a dense eigen-decomposition.
  double spectral_radius() const;

 private:
  PairInputs in_;
  Eigen::Index n_;
  Eigen::MatrixXd Wx_;
  Eigen::VectorXd Lx_;
  Eigen::VectorXd px_, qx_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::VectorXd left_;   // (q_x^T R)^T
  Eigen::VectorXd right_;  // R L_x p_x
  Eigen::VectorXd tail_;   // (I + c W_x R L_x) p_x
};

/// Plain Kronecker product, written out for the oracles.
Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

double kernel_dense_oracle(const PairInputs& in);
double kernel_dense_oracle(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params);

double edge_influence_dense_oracle(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params,
                                   Eigen::Index i, Eigen::Index j);

}  // namespace teamlens
