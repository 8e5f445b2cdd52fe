#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adasamp {

using cplx = std::complex<double>;

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ExhaustionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grid extent. A 1D signal of length N is stored as rows = N, cols = 1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool is_1d() const { return cols == 1; }
  friend bool operator==(const Shape &, const Shape &) = default;
};

std::string to_string(const Shape &s);

// Complex-valued object on a row-major grid.
class ComplexImage {
public:
  ComplexImage() = default;
  explicit ComplexImage(Shape shape, cplx fill = {0.0, 0.0});
  ComplexImage(Shape shape, std::vector<cplx> data);

  const Shape &shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  cplx &operator[](std::size_t i) { return data_[i]; }
  const cplx &operator[](std::size_t i) const { return data_[i]; }
  cplx &at(std::size_t r, std::size_t c) { return data_[r * shape_.cols + c]; }
  const cplx &at(std::size_t r, std::size_t c) const {
    return data_[r * shape_.cols + c];
  }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }
  std::vector<cplx> &values() { return data_; }
  const std::vector<cplx> &values() const { return data_; }

  bool all_finite() const;
  double norm() const;
  double max_abs() const;

  ComplexImage &operator+=(const ComplexImage &o);
  ComplexImage &operator-=(const ComplexImage &o);
  ComplexImage &operator*=(cplx a);

  friend bool operator==(const ComplexImage &, const ComplexImage &) = default;

private:
  Shape shape_;
  std::vector<cplx> data_;
};

ComplexImage operator+(ComplexImage a, const ComplexImage &b);
ComplexImage operator-(ComplexImage a, const ComplexImage &b);
ComplexImage operator*(cplx s, ComplexImage a);

// Standard complex inner product <a, b> = sum conj(a_i) b_i.
cplx inner(std::span<const cplx> a, std::span<const cplx> b);

void require_same_shape(const Shape &a, const Shape &b, const char *what);

// Real-valued grid (variance maps, magnitude images).
struct RealGrid {
  Shape shape;
  std::vector<double> values;

  RealGrid() = default;
  explicit RealGrid(Shape s, double fill = 0.0)
      : shape(s), values(s.size(), fill) {}
  double &operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

RealGrid magnitude(const ComplexImage &x);

} // namespace adasamp
