#include "adasamp/image.hpp"

#include <algorithm>
#include <cmath>

namespace adasamp {

std::string to_string(const Shape &s) {
  return "(" + std::to_string(s.rows) + ", " + std::to_string(s.cols) + ")";
}

ComplexImage::ComplexImage(Shape shape, cplx fill)
    : shape_(shape), data_(shape.size(), fill) {}

ComplexImage::ComplexImage(Shape shape, std::vector<cplx> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size())
    throw DimensionError("ComplexImage: data length " +
                         std::to_string(data_.size()) + " does not match shape " +
                         to_string(shape_));
}

bool ComplexImage::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const cplx &v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double ComplexImage::norm() const {
  double s = 0.0;
  for (const auto &v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double ComplexImage::max_abs() const {
  double m = 0.0;
  for (const auto &v : data_) m = std::max(m, std::abs(v));
  return m;
}

ComplexImage &ComplexImage::operator+=(const ComplexImage &o) {
  require_same_shape(shape_, o.shape_, "ComplexImage +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexImage &ComplexImage::operator-=(const ComplexImage &o) {
  require_same_shape(shape_, o.shape_, "ComplexImage -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexImage &ComplexImage::operator*=(cplx a) {
  for (auto &v : data_) v *= a;
  return *this;
}

ComplexImage operator+(ComplexImage a, const ComplexImage &b) { return a += b; }
ComplexImage operator-(ComplexImage a, const ComplexImage &b) { return a -= b; }
ComplexImage operator*(cplx s, ComplexImage a) { return a *= s; }

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size())
    throw DimensionError("inner: length mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

void require_same_shape(const Shape &a, const Shape &b, const char *what) {
  if (!(a == b))
    throw DimensionError(std::string(what) + ": shape " + to_string(a) +
                         " vs " + to_string(b));
}

RealGrid magnitude(const ComplexImage &x) {
  RealGrid g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = std::abs(x[i]);
  return g;
}

} // namespace adasamp
