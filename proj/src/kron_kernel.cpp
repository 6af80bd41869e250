#include "teamlens/kron_kernel.hpp"

#include <cmath>
#include <string>

#include <omp.h>

namespace teamlens {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr Eigen::Index kParallelWork = 1 << 15;

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

// out = A * B with the rows of A split evenly across threads. Each block is a
// single-threaded Eigen product.
template <typename Lhs, typename Rhs, typename Out>
void row_blocked_product(const Lhs& A, const Rhs& B, Out& out, bool parallel) {
  const Eigen::Index rows = A.rows();
#pragma omp parallel if (parallel)
  {
    const Eigen::Index threads = omp_get_num_threads();
    const Eigen::Index t = omp_get_thread_num();
    const Eigen::Index begin = rows * t / threads;
    const Eigen::Index end = rows * (t + 1) / threads;
    if (end > begin) out.middleRows(begin, end - begin).noalias() = A.middleRows(begin, end - begin) * B;
  }
}

Eigen::VectorXd uniform(Eigen::Index n) {
  return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

Eigen::VectorXd checked_distribution(const std::optional<Eigen::VectorXd>& supplied, Eigen::Index n,
                                     const char* what) {
  if (!supplied) return uniform(n);
  const auto& v = *supplied;
  if (v.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " distribution has length " +
                                                  std::to_string(v.size()) + ", expected " + std::to_string(n));
  }
  if ((v.array() < 0.0).any() || !v.allFinite()) {
    throw Error(ErrorCode::InvalidParams, std::string(what) + " distribution must be nonnegative");
  }
  if (std::abs(v.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidParams, std::string(what) + " distribution must sum to 1");
  }
  return v;
}

Eigen::VectorXd outer_vec(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

template <typename Step>
SolveReport fixed_point(Step&& step, const Eigen::VectorXd& b, double tol, int max_iter) {
  SolveReport report;
  Eigen::VectorXd z = b;
  const double b_norm = b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0;
  while (report.iterations < max_iter) {
    Eigen::VectorXd next = b + step(z);
    ++report.iterations;
    const double diff = z.size() ? (next - z).lpNorm<Eigen::Infinity>() : 0.0;
    z.swap(next);
    if (!(diff <= tol)) continue;

    // One more step gives the true residual of z and a better iterate.
    Eigen::VectorXd verify = b + step(z);
    report.residual = z.size() ? (verify - z).lpNorm<Eigen::Infinity>() : 0.0;
    z.swap(verify);
    if (report.residual <= tol * (1.0 + b_norm)) {
      report.converged = true;
      report.solution = std::move(z);
      return report;
    }
  }
  const Eigen::VectorXd last = b + step(z);
  report.residual = z.size() ? (last - z).lpNorm<Eigen::Infinity>() : 0.0;
  report.solution = std::move(z);
  throw NotConvergedError("fixed-point iteration did not converge in " + std::to_string(max_iter) +
                              " iterations (residual " + std::to_string(report.residual) + ")",
                          std::move(report));
}

}  // namespace

void validate(const KernelParams& params) {
  if (!(params.c > 0.0 && params.c < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "decay factor c must lie in (0, 1), got " + std::to_string(params.c));
  }
  if (!(params.tol > 0.0)) throw Error(ErrorCode::InvalidParams, "tol must be positive");
  if (params.max_iter < 1) throw Error(ErrorCode::InvalidParams, "max_iter must be at least 1");
}

PairInputs PairInputs::from_teams(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params) {
  validate(params);
  if (G.L.cols() != Gp.L.cols()) {
    throw Error(ErrorCode::SkillDimensionMismatch, "teams use different skill dimensions");
  }
  PairInputs in;
  in.W = G.W;
  in.Wp = Gp.W;
  in.L = G.L;
  in.Lp = Gp.L;
  in.p = checked_distribution(params.start, G.W.rows(), "start");
  in.q = checked_distribution(params.stop, G.W.rows(), "stop");
  in.pp = checked_distribution(params.start_prime, Gp.W.rows(), "start_prime");
  in.qp = checked_distribution(params.stop_prime, Gp.W.rows(), "stop_prime");
  in.c = params.c;
  return in;
}

Eigen::MatrixXd PairInputs::overlap() const { return skill_overlap(L, Lp); }
Eigen::VectorXd PairInputs::start_pairs() const { return outer_vec(p, pp); }
Eigen::VectorXd PairInputs::stop_pairs() const { return outer_vec(q, qp); }

PairInputs PairInputs::swapped() const {
  PairInputs out;
  out.W = Wp;
  out.Wp = W;
  out.L = Lp;
  out.Lp = L;
  out.p = pp;
  out.pp = p;
  out.q = qp;
  out.qp = q;
  out.c = c;
  return out;
}

KronOperator::KronOperator(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Wp, const Eigen::MatrixXd& S,
                           double c)
    : W_(W), Wp_(Wp), S_(S), c_(c) {
  if (W.rows() != W.cols() || Wp.rows() != Wp.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "adjacency matrices must be square");
  }
  if (S.rows() != W.rows() || S.cols() != Wp.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "skill overlap must be m x m'");
  }
}

KronOperator::KronOperator(const PairInputs& in) : KronOperator(in.W, in.Wp, in.overlap(), in.c) {}

void KronOperator::check_length(const Eigen::VectorXd& x) const {
  if (x.size() != size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vector length " + std::to_string(x.size()) + " != m*m' = " + std::to_string(size()));
  }
}

Eigen::VectorXd KronOperator::apply_walk(const Eigen::VectorXd& x) const {
  check_length(x);
  const Eigen::Index m = W_.rows(), mp = Wp_.rows();
  const bool parallel = m * mp * (m + mp) > kParallelWork;
  const ConstRowMap X(x.data(), m, mp);
  // T = X W'^T, then Y = c W T.
  RowMatrix T(m, mp);
  row_blocked_product(X, Wp_.transpose(), T, parallel);
  Eigen::VectorXd y(m * mp);
  RowMap Y(y.data(), m, mp);
  row_blocked_product(W_, T, Y, parallel);
  y *= c_;
  return y;
}

Eigen::VectorXd KronOperator::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = apply_walk(x);
  y.array() *= Eigen::Map<const Eigen::ArrayXd>(S_.data(), S_.size());
  return y;
}

Eigen::VectorXd KronOperator::apply_transpose(const Eigen::VectorXd& x) const {
  check_length(x);
  const Eigen::Index m = W_.rows(), mp = Wp_.rows();
  const bool parallel = m * mp * (m + mp) > kParallelWork;
  const RowMatrix SX = S_.cwiseProduct(ConstRowMap(x.data(), m, mp));
  // T = (S o X) W', then Y = c W^T T.
  RowMatrix T(m, mp);
  row_blocked_product(SX, Wp_, T, parallel);
  Eigen::VectorXd y(m * mp);
  RowMap Y(y.data(), m, mp);
  row_blocked_product(W_.transpose(), T, Y, parallel);
  y *= c_;
  return y;
}

Eigen::VectorXd KronOperator::apply_reference(const Eigen::VectorXd& x) const {
  check_length(x);
  const ConstRowMap X(x.data(), m(), mp());
  RowMatrix Y = c_ * S_.cwiseProduct(W_ * X * Wp_.transpose());
  return Eigen::Map<const Eigen::VectorXd>(Y.data(), Y.size());
}

Eigen::VectorXd KronOperator::apply_transpose_reference(const Eigen::VectorXd& x) const {
  check_length(x);
  const ConstRowMap X(x.data(), m(), mp());
  RowMatrix Y = c_ * (W_.transpose() * S_.cwiseProduct(X) * Wp_);
  return Eigen::Map<const Eigen::VectorXd>(Y.data(), Y.size());
}

double KronOperator::spectral_radius_bound() const {
  if (size() == 0) return 0.0;
  const Eigen::VectorXd r = W_.cwiseAbs().rowwise().sum();
  const Eigen::VectorXd rp = Wp_.cwiseAbs().rowwise().sum();
  return std::abs(c_) * S_.cwiseAbs().cwiseProduct(r * rp.transpose()).maxCoeff();
}

void require_contraction(const KronOperator& op) {
  const double bound = op.spectral_radius_bound();
  if (!(bound < 1.0)) {
    throw Error(ErrorCode::ConvergenceRisk,
                "walk operator bound " + std::to_string(bound) + " >= 1; decrease c");
  }
}

SolveReport solve_right(const KronOperator& op, const Eigen::VectorXd& b, double tol, int max_iter) {
  require_contraction(op);
  if (b.size() != op.size()) throw Error(ErrorCode::DimensionMismatch, "right-hand side has wrong length");
  return fixed_point([&op](const Eigen::VectorXd& z) { return op.apply(z); }, b, tol, max_iter);
}

SolveReport solve_left(const KronOperator& op, const Eigen::VectorXd& b, double tol, int max_iter) {
  require_contraction(op);
  if (b.size() != op.size()) throw Error(ErrorCode::DimensionMismatch, "right-hand side has wrong length");
  return fixed_point([&op](const Eigen::VectorXd& z) { return op.apply_transpose(z); }, b, tol, max_iter);
}

double kernel(const PairInputs& in, double tol, int max_iter) {
  const Eigen::MatrixXd S = in.overlap();
  const KronOperator op(in.W, in.Wp, S, in.c);
  const RowMatrix S_row = S;
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(S_row.data(), S_row.size())
                                .cwiseProduct(in.start_pairs());
  const SolveReport z = solve_right(op, b, tol, max_iter);
  return in.stop_pairs().dot(z.solution);
}

double kernel(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params) {
  return kernel(PairInputs::from_teams(G, Gp, params), params.tol, params.max_iter);
}

}  // namespace teamlens
