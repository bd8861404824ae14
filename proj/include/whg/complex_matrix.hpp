#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "whg/errors.hpp"
#include "whg/field.hpp"

namespace whg {

using Complex = std::complex<double>;

// p-th roots of unity; every root is taken as an integer power of
// omega_p = exp(2 pi i / p), evaluated in long double to avoid phase drift.
class RootsOfUnity {
 public:
  explicit RootsOfUnity(std::int64_t p) : p_(p), roots_(static_cast<std::size_t>(p)) {
    const long double theta = 2.0L * 3.14159265358979323846264338327950288L / static_cast<long double>(p);
    for (std::int64_t j = 0; j < p; ++j) {
      const long double a = theta * static_cast<long double>(j);
      roots_[static_cast<std::size_t>(j)] = Complex(static_cast<double>(std::cos(a)),
                                                    static_cast<double>(std::sin(a)));
    }
  }

  Complex operator[](std::int64_t e) const { return roots_[static_cast<std::size_t>(mod_p(e, p_))]; }
  std::int64_t p() const { return p_; }

 private:
  std::int64_t p_;
  std::vector<Complex> roots_;
};

struct ComplexMatrix {
  std::int64_t rows = 0, cols = 0;
  std::vector<Complex> a;

  ComplexMatrix() = default;
  ComplexMatrix(std::int64_t r, std::int64_t c) : rows(r), cols(c), a(static_cast<std::size_t>(r * c)) {}

  Complex& at(std::int64_t r, std::int64_t c) { return a[static_cast<std::size_t>(r * cols + c)]; }
  Complex at(std::int64_t r, std::int64_t c) const { return a[static_cast<std::size_t>(r * cols + c)]; }

  static ComplexMatrix identity(std::int64_t n) {
    ComplexMatrix m(n, n);
    for (std::int64_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(cols, rows);
    for (std::int64_t i = 0; i < rows; ++i)
      for (std::int64_t j = 0; j < cols; ++j) m.at(j, i) = std::conj(at(i, j));
    return m;
  }

  Complex trace() const {
    Complex t = 0.0;
    for (std::int64_t i = 0; i < rows && i < cols; ++i) t += at(i, i);
    return t;
  }

  ComplexMatrix scaled(Complex s) const {
    ComplexMatrix m = *this;
    for (auto& v : m.a) v *= s;
    return m;
  }
};

inline ComplexMatrix mat_mul(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.cols != y.rows) throw Error("complex matrix shape mismatch");
  ComplexMatrix r(x.rows, y.cols);
  for (std::int64_t i = 0; i < x.rows; ++i)
    for (std::int64_t k = 0; k < x.cols; ++k) {
      const Complex v = x.at(i, k);
      if (std::norm(v) == 0.0) continue;
      for (std::int64_t j = 0; j < y.cols; ++j) r.at(i, j) += v * y.at(k, j);
    }
  return r;
}

inline ComplexMatrix conjugate_by(const ComplexMatrix& u, const ComplexMatrix& m) {
  return mat_mul(mat_mul(u, m), u.adjoint());
}

// Kronecker product; combined index is first-register major.
inline ComplexMatrix tensor(const ComplexMatrix& x, const ComplexMatrix& y) {
  ComplexMatrix r(x.rows * y.rows, x.cols * y.cols);
  for (std::int64_t i1 = 0; i1 < x.rows; ++i1)
    for (std::int64_t j1 = 0; j1 < x.cols; ++j1) {
      const Complex v = x.at(i1, j1);
      if (std::norm(v) == 0.0) continue;
      for (std::int64_t i2 = 0; i2 < y.rows; ++i2)
        for (std::int64_t j2 = 0; j2 < y.cols; ++j2)
          r.at(i1 * y.rows + i2, j1 * y.cols + j2) = v * y.at(i2, j2);
    }
  return r;
}

inline double max_abs_diff(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw Error("complex matrix shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
  return m;
}

inline double unitarity_deviation(const ComplexMatrix& u) {
  return max_abs_diff(mat_mul(u.adjoint(), u), ComplexMatrix::identity(u.cols));
}

}  // namespace whg
