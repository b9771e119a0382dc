#pragma once

#include <Eigen/Dense>

#include <vector>

namespace kspec {

/// Dense k x k x k array, row-major in (a, b, c).
class WhitenedTensor {
 public:
  WhitenedTensor() = default;
  explicit WhitenedTensor(int dim) : dim_(dim), entries_(static_cast<size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }

  double& operator()(int a, int b, int c) { return entries_[index(a, b, c)]; }
  double operator()(int a, int b, int c) const { return entries_[index(a, b, c)]; }

  const std::vector<double>& entries() const { return entries_; }
  std::vector<double>& entries() { return entries_; }

  /// Hilbert-Schmidt (Frobenius) norm.
  double norm() const;

  /// max |T(a,b,c) - T(b,c,a)|.
  double cyclic_asymmetry() const;

  WhitenedTensor& operator+=(const WhitenedTensor& other);
  WhitenedTensor& operator-=(const WhitenedTensor& other);
  WhitenedTensor& operator*=(double s);

  /// Adds weight * u (x) v (x) w.
  void add_outer(double weight, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                 const Eigen::VectorXd& w);

  /// sum_h weights(h) * V.col(h)^{(x)3}.
  static WhitenedTensor from_components(const Eigen::VectorXd& weights, const Eigen::MatrixXd& V);

  /// T x_1 A x_2 A x_3 A, i.e. out(a,b,c) = sum T(i,j,l) A(a,i) A(b,j) A(c,l).
  WhitenedTensor multilinear(const Eigen::MatrixXd& A) const;

 private:
  size_t index(int a, int b, int c) const {
    return (static_cast<size_t>(a) * dim_ + static_cast<size_t>(b)) * dim_ + static_cast<size_t>(c);
  }

  int dim_ = 0;
  std::vector<double> entries_;
};

}  // namespace kspec
