#pragma once

#include <functional>

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>

namespace fput::detail {

using MatVec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Adapter exposing a matrix-vector product to Eigen's iterative solvers.
class LinearMap;

}  // namespace fput::detail

namespace Eigen::internal {
template <>
struct traits<fput::detail::LinearMap> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace fput::detail {

class LinearMap : public Eigen::EigenBase<LinearMap> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  LinearMap(Eigen::Index n, MatVec op) : n_(n), op_(std::move(op)) {}
  Eigen::Index rows() const { return n_; }
  Eigen::Index cols() const { return n_; }

  template <typename Rhs>
  Eigen::Product<LinearMap, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<LinearMap, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const { op_(x, y); }

 private:
  Eigen::Index n_;
  MatVec op_;
};

struct GmresResult {
  bool converged = false;
  double error = 0.0;  // relative residual estimate
  int iterations = 0;
};

// Solves A x = b with restarted GMRES; x holds the initial guess on entry.
inline GmresResult gmres(const LinearMap& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol,
                         int max_iterations, int restart) {
  Eigen::GMRES<LinearMap, Eigen::IdentityPreconditioner> solver;
  solver.setTolerance(tol);
  solver.setMaxIterations(max_iterations);
  solver.set_restart(restart);
  solver.compute(A);
  x = solver.solveWithGuess(b, x);
  return {solver.info() == Eigen::Success, solver.error(), static_cast<int>(solver.iterations())};
}

}  // namespace fput::detail

namespace Eigen::internal {

template <typename Rhs>
struct generic_product_impl<fput::detail::LinearMap, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<fput::detail::LinearMap, Rhs,
                                generic_product_impl<fput::detail::LinearMap, Rhs>> {
  using Scalar = typename Product<fput::detail::LinearMap, Rhs>::Scalar;

  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const fput::detail::LinearMap& lhs, const Rhs& rhs, const Scalar& alpha) {
    Eigen::VectorXd x = rhs;
    Eigen::VectorXd y(x.size());
    lhs.apply(x, y);
    dst.noalias() += alpha * y;
  }
};

}  // namespace Eigen::internal
