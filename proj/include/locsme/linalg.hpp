#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>

namespace locsme {

using Complex = std::complex<double>;
using ComplexVec = Eigen::VectorXcd;
using ComplexMat = Eigen::MatrixXcd;

// Tally of real floating-point operations. A complex multiply counts 6,
// a complex add counts 2.
class OpCounter {
 public:
  void add(std::uint64_t flops) { count_ += flops; }
  std::uint64_t count() const { return count_; }
  void reset() { count_ = 0; }

 private:
  std::uint64_t count_ = 0;
};

// Counted primitives used by the adaptive kernels.
namespace kern {

// a^H b
inline Complex dot(const ComplexVec& a, const ComplexVec& b, OpCounter& ops) {
  ops.add(8 * static_cast<std::uint64_t>(a.size()));
  return a.dot(b);
}

inline double squared_norm(const ComplexVec& a, OpCounter& ops) {
  ops.add(4 * static_cast<std::uint64_t>(a.size()));
  return a.squaredNorm();
}

// y += alpha * x
inline void axpy(Complex alpha, const ComplexVec& x, ComplexVec& y, OpCounter& ops) {
  ops.add(8 * static_cast<std::uint64_t>(x.size()));
  y += alpha * x;
}

inline void scale(ComplexVec& x, Complex alpha, OpCounter& ops) {
  ops.add(6 * static_cast<std::uint64_t>(x.size()));
  x *= alpha;
}

// A * x for square A
inline ComplexVec matvec(const ComplexMat& a, const ComplexVec& x, OpCounter& ops) {
  const auto m = static_cast<std::uint64_t>(a.rows());
  ops.add(8 * m * static_cast<std::uint64_t>(a.cols()));
  return a * x;
}

// R <- ((i-1) R + x x^H) / i
inline void running_outer_mean(ComplexMat& r, const ComplexVec& x, std::uint64_t i, OpCounter& ops) {
  const auto m = static_cast<std::uint64_t>(x.size());
  ops.add(10 * m * m);
  const double keep = static_cast<double>(i - 1) / static_cast<double>(i);
  r = keep * r + (x * x.adjoint()) / static_cast<double>(i);
}

}  // namespace kern

inline double hermitian_defect(const ComplexMat& a) { return (a - a.adjoint()).norm(); }

}  // namespace locsme
