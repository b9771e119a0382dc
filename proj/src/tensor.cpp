#include "kspec/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "kspec/errors.hpp"

namespace kspec {

double WhitenedTensor::norm() const {
  double s = 0.0;
  for (double v : entries_) s += v * v;
  return std::sqrt(s);
}

double WhitenedTensor::cyclic_asymmetry() const {
  double worst = 0.0;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      for (int c = 0; c < dim_; ++c)
        worst = std::max(worst, std::abs((*this)(a, b, c) - (*this)(b, c, a)));
  return worst;
}

WhitenedTensor& WhitenedTensor::operator+=(const WhitenedTensor& other) {
  if (other.dim_ != dim_) throw InputError("tensor dimension mismatch");
  for (size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

WhitenedTensor& WhitenedTensor::operator-=(const WhitenedTensor& other) {
  if (other.dim_ != dim_) throw InputError("tensor dimension mismatch");
  for (size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
  return *this;
}

WhitenedTensor& WhitenedTensor::operator*=(double s) {
  for (double& v : entries_) v *= s;
  return *this;
}

void WhitenedTensor::add_outer(double weight, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& w) {
  for (int a = 0; a < dim_; ++a) {
    const double wa = weight * u(a);
    for (int b = 0; b < dim_; ++b) {
      const double wab = wa * v(b);
      double* row = &entries_[index(a, b, 0)];
      for (int c = 0; c < dim_; ++c) row[c] += wab * w(c);
    }
  }
}

WhitenedTensor WhitenedTensor::from_components(const Eigen::VectorXd& weights,
                                               const Eigen::MatrixXd& V) {
  if (weights.size() != V.cols()) throw InputError("from_components: weight count mismatch");
  WhitenedTensor T(static_cast<int>(V.rows()));
  for (Eigen::Index h = 0; h < V.cols(); ++h) {
    const Eigen::VectorXd v = V.col(h);
    T.add_outer(weights(h), v, v, v);
  }
  return T;
}

WhitenedTensor WhitenedTensor::multilinear(const Eigen::MatrixXd& A) const {
  if (A.cols() != dim_) throw InputError("multilinear: factor has wrong column count");
  const int k = static_cast<int>(A.rows());
  const int n = dim_;
  // Contract one mode at a time: O(n^3 k + n^2 k^2 + n k^3).
  std::vector<double> s1(static_cast<size_t>(k) * n * n, 0.0);  // (a, j, l)
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) {
      const double f = A(a, i);
      if (f == 0.0) continue;
      for (int jl = 0; jl < n * n; ++jl) s1[static_cast<size_t>(a) * n * n + jl] += f * entries_[static_cast<size_t>(i) * n * n + jl];
    }
  std::vector<double> s2(static_cast<size_t>(k) * k * n, 0.0);  // (a, b, l)
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int j = 0; j < n; ++j) {
        const double f = A(b, j);
        if (f == 0.0) continue;
        for (int l = 0; l < n; ++l)
          s2[(static_cast<size_t>(a) * k + b) * n + l] += f * s1[(static_cast<size_t>(a) * n + j) * n + l];
      }
  WhitenedTensor out(k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += A(c, l) * s2[(static_cast<size_t>(a) * k + b) * n + l];
        out(a, b, c) = s;
      }
  return out;
}

}  // namespace kspec
