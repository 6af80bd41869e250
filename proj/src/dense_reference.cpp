#include "teamlens/dense_reference.hpp"

#include <Eigen/Eigenvalues>

#include "teamlens/error.hpp"

namespace teamlens {

namespace {

Eigen::MatrixXd single_entry_pair(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  J(i, j) += 1.0;
  J(j, i) += 1.0;
  return J;
}

void check_size(Eigen::Index pairs) {
  if (pairs > kOracleMaxPairs) {
    throw Error(ErrorCode::OracleSizeExceeded,
                "dense oracle limited to m*m' <= " + std::to_string(kOracleMaxPairs));
  }
}

}  // namespace

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

DenseSystem::DenseSystem(const PairInputs& in) : in_(in), n_(in.pair_count()) {
  check_size(n_);
  const Eigen::Index m = in.m(), mp = in.mp();
  Wx_ = kron(in.W, in.Wp);
  Lx_.resize(n_);
  px_.resize(n_);
  qx_.resize(n_);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index a = 0; a < mp; ++a) {
      Lx_(i * mp + a) = in.L.row(i).dot(in.Lp.row(a));
      px_(i * mp + a) = in.p(i) * in.pp(a);
      qx_(i * mp + a) = in.q(i) * in.qp(a);
    }
  }
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n_, n_) - in.c * Lx_.asDiagonal() * Wx_;
  lu_.compute(system);
  left_ = lu_.transpose().solve(qx_);
  right_ = lu_.solve(Lx_.cwiseProduct(px_));
  tail_ = px_ + in.c * (Wx_ * right_);
}

Eigen::VectorXd DenseSystem::resolve(const Eigen::VectorXd& y) const { return lu_.solve(y); }

Eigen::VectorXd DenseSystem::resolve_transpose(const Eigen::VectorXd& y) const {
  return lu_.transpose().solve(y);
}

double DenseSystem::kernel() const { return qx_.dot(right_); }

double DenseSystem::edge_influence(GraphSide side, Eigen::Index i, Eigen::Index j) const {
  const Eigen::MatrixXd dWx = side == GraphSide::Before ? kron(single_entry_pair(in_.m(), i, j), in_.Wp)
                                                        : kron(in_.W, single_entry_pair(in_.mp(), i, j));
  return in_.c * left_.dot(Lx_.asDiagonal() * (dWx * right_));
}

double DenseSystem::attribute_influence(GraphSide side, Eigen::Index i, Eigen::Index k) const {
  const Eigen::Index m = in_.m(), mp = in_.mp();
  Eigen::VectorXd dLx = Eigen::VectorXd::Zero(n_);
  if (side == GraphSide::Before) {
    for (Eigen::Index a = 0; a < mp; ++a) dLx(i * mp + a) = in_.Lp(a, k);
  } else {
    for (Eigen::Index a = 0; a < m; ++a) dLx(a * mp + i) = in_.L(a, k);
  }
  return left_.dot(dLx.cwiseProduct(tail_));
}

DenseSystem::AllInfluences DenseSystem::all_influences() const {
  const Eigen::Index m = in_.m(), mp = in_.mp(), d = in_.L.cols();
  AllInfluences out;
  out.kernel = kernel();
  out.edge_before = Eigen::MatrixXd::Zero(m, m);
  out.edge_after = Eigen::MatrixXd::Zero(mp, mp);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      out.edge_before(i, j) = out.edge_before(j, i) = edge_influence(GraphSide::Before, i, j);
    }
  }
  for (Eigen::Index i = 0; i < mp; ++i) {
    for (Eigen::Index j = i + 1; j < mp; ++j) {
      out.edge_after(i, j) = out.edge_after(j, i) = edge_influence(GraphSide::After, i, j);
    }
  }
  out.attr_before.resize(m, d);
  out.attr_after.resize(mp, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) out.attr_before(i, k) = attribute_influence(GraphSide::Before, i, k);
    for (Eigen::Index i = 0; i < mp; ++i) out.attr_after(i, k) = attribute_influence(GraphSide::After, i, k);
  }
  return out;
}

double DenseSystem::spectral_radius() const {
  if (n_ == 0) return 0.0;
  const Eigen::MatrixXd A = in_.c * Lx_.asDiagonal() * Wx_;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double kernel_dense_oracle(const PairInputs& in) { return DenseSystem(in).kernel(); }

double kernel_dense_oracle(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params) {
  check_size(static_cast<Eigen::Index>(G.size() * Gp.size()));
  return kernel_dense_oracle(PairInputs::from_teams(G, Gp, params));
}

double edge_influence_dense_oracle(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params,
                                   Eigen::Index i, Eigen::Index j) {
  check_size(static_cast<Eigen::Index>(G.size() * Gp.size()));
  return DenseSystem(PairInputs::from_teams(G, Gp, params)).edge_influence(GraphSide::Before, i, j);
}

}  // namespace teamlens
