#include "adasamp/forward_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "adasamp/fft.hpp"
#include "adasamp/rng.hpp"

namespace adasamp {

SamplingMode parse_sampling_mode(std::string_view s) {
  if (s == "pointwise") return SamplingMode::pointwise;
  if (s == "line") return SamplingMode::line;
  throw ArgumentError("unknown sampling mode: " + std::string(s));
}

std::string_view to_string(SamplingMode m) {
  return m == SamplingMode::line ? "line" : "pointwise";
}

// ---------------------------------------------------------------- mask

SamplingMask::SamplingMask(Shape shape, SamplingMode mode)
    : shape_(shape), mode_(mode), member_(shape.size(), 0) {
  if (shape.size() == 0) throw ArgumentError("SamplingMask: empty shape");
}

SamplingMask SamplingMask::full(Shape shape) {
  SamplingMask m(shape);
  m.order_.resize(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) m.order_[i] = i;
  std::fill(m.member_.begin(), m.member_.end(), 1);
  return m;
}

void SamplingMask::add(std::span<const std::size_t> indices) {
  std::vector<std::uint8_t> seen(member_);
  for (std::size_t n : indices) {
    if (n >= shape_.size())
      throw ArgumentError("SamplingMask: index " + std::to_string(n) +
                          " out of range");
    if (seen[n])
      throw ArgumentError("SamplingMask: index " + std::to_string(n) +
                          " already acquired");
    seen[n] = 1;
  }
  if (mode_ == SamplingMode::line) {
    for (std::size_t n : indices) {
      const std::size_t col = n % shape_.cols;
      for (std::size_t r = 0; r < shape_.rows; ++r)
        if (!seen[r * shape_.cols + col])
          throw ArgumentError("SamplingMask: line mode requires complete "
                              "column " + std::to_string(col));
    }
  }
  member_ = std::move(seen);
  order_.insert(order_.end(), indices.begin(), indices.end());
}

std::vector<std::size_t> SamplingMask::column_indices(std::size_t col) const {
  std::vector<std::size_t> out(shape_.rows);
  for (std::size_t r = 0; r < shape_.rows; ++r) out[r] = r * shape_.cols + col;
  return out;
}

bool SamplingMask::column_acquired(std::size_t col) const {
  for (std::size_t r = 0; r < shape_.rows; ++r)
    if (!member_[r * shape_.cols + col]) return false;
  return true;
}

std::size_t SamplingMask::lines_acquired() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < shape_.cols; ++c) n += column_acquired(c) ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------- coils

CoilSensitivities::CoilSensitivities(std::vector<ComplexImage> m)
    : maps(std::move(m)) {
  if (maps.empty()) throw ArgumentError("CoilSensitivities: need >= 1 coil");
  const Shape s = maps.front().shape();
  for (const auto &map : maps) {
    require_same_shape(s, map.shape(), "CoilSensitivities");
    if (!map.all_finite())
      throw ArgumentError("CoilSensitivities: non-finite map");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    double sos = 0.0;
    for (const auto &map : maps) sos += std::norm(map[i]);
    if (!(sos > 0.0))
      throw ArgumentError("CoilSensitivities: zero sensitivity at pixel " +
                          std::to_string(i));
  }
}

// ---------------------------------------------------------------- operator

SensingOperator::SensingOperator(SamplingMask mask, CoilSensitivities coils,
                                 double noise_sigma)
    : mask_(std::move(mask)), coils_(std::move(coils)),
      noise_sigma_(noise_sigma) {
  require_same_shape(mask_.shape(), coils_.shape(), "SensingOperator");
  if (!(noise_sigma >= 0.0))
    throw ArgumentError("SensingOperator: noise_sigma must be >= 0");
}

SensingOperator SensingOperator::with_mask(SamplingMask mask) const {
  return SensingOperator(std::move(mask), coils_, noise_sigma_);
}

SensingOperator SensingOperator::full_grid() const {
  return with_mask(SamplingMask::full(shape()));
}

cplx inner(const MeasurementSet &a, const MeasurementSet &b) {
  if (a.num_coils() != b.num_coils())
    throw DimensionError("inner: coil count mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t c = 0; c < a.num_coils(); ++c)
    s += inner(a.coils[c].data(), b.coils[c].data());
  return s;
}

double norm(const MeasurementSet &y) {
  double s = 0.0;
  for (const auto &c : y.coils) s += std::pow(c.norm(), 2);
  return std::sqrt(s);
}

namespace {

void check_measurements(const MeasurementSet &y, const SensingOperator &op) {
  if (y.num_coils() != op.num_coils())
    throw DimensionError("measurement coil count " +
                         std::to_string(y.num_coils()) + " vs operator " +
                         std::to_string(op.num_coils()));
  require_same_shape(y.shape(), op.shape(), "measurements vs operator");
}

void apply_mask(ComplexImage &k, const SamplingMask &mask) {
  const auto member = mask.membership();
  for (std::size_t i = 0; i < k.size(); ++i)
    if (!member[i]) k[i] = cplx{0.0, 0.0};
}

} // namespace

MeasurementSet apply_forward(const ComplexImage &x, const SensingOperator &op) {
  require_same_shape(x.shape(), op.shape(), "apply_forward");
  MeasurementSet y;
  y.coils.reserve(op.num_coils());
  for (const auto &s : op.coils().maps) {
    ComplexImage k(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) k[i] = s[i] * x[i];
    fft_forward(k.data(), k.shape());
    apply_mask(k, op.mask());
    y.coils.push_back(std::move(k));
  }
  return y;
}

ComplexImage apply_adjoint(const MeasurementSet &y, const SensingOperator &op) {
  check_measurements(y, op);
  ComplexImage x(op.shape());
  ComplexImage k;
  for (std::size_t c = 0; c < op.num_coils(); ++c) {
    k = y.coils[c];
    apply_mask(k, op.mask());
    fft_inverse(k.data(), k.shape());
    const auto &s = op.coils().maps[c];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += std::conj(s[i]) * k[i];
  }
  return x;
}

ComplexImage apply_residual_adjoint(const ComplexImage &x,
                                    const MeasurementSet &y,
                                    const SensingOperator &op) {
  require_same_shape(x.shape(), op.shape(), "apply_residual_adjoint");
  check_measurements(y, op);
  const auto member = op.mask().membership();
  ComplexImage out(op.shape());
  ComplexImage k(op.shape());
  for (std::size_t c = 0; c < op.num_coils(); ++c) {
    const auto &s = op.coils().maps[c];
    for (std::size_t i = 0; i < x.size(); ++i) k[i] = s[i] * x[i];
    fft_forward(k.data(), k.shape());
    const auto &yc = y.coils[c];
    for (std::size_t i = 0; i < k.size(); ++i)
      k[i] = member[i] ? k[i] - yc[i] : cplx{0.0, 0.0};
    fft_inverse(k.data(), k.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += std::conj(s[i]) * k[i];
  }
  return out;
}

MeasurementSet add_noise(MeasurementSet y, const SamplingMask &mask,
                         double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ArgumentError("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return y;
  require_same_shape(y.shape(), mask.shape(), "add_noise");
  Rng rng = make_rng(seed);
  const auto member = mask.membership();
  const double var = sigma * sigma;
  for (auto &coil : y.coils)
    for (std::size_t i = 0; i < coil.size(); ++i)
      if (member[i]) coil[i] += complex_gaussian(rng, var);
  return y;
}

// ---------------------------------------------------------------- phantoms

PhantomKind parse_phantom_kind(std::string_view s) {
  if (s == "shepp_logan_like") return PhantomKind::shepp_logan_like;
  if (s == "smooth_bumps") return PhantomKind::smooth_bumps;
  if (s == "piecewise_constant_1d") return PhantomKind::piecewise_constant_1d;
  throw ArgumentError("unsupported phantom kind: " + std::string(s));
}

std::string_view to_string(PhantomKind k) {
  switch (k) {
  case PhantomKind::shepp_logan_like: return "shepp_logan_like";
  case PhantomKind::smooth_bumps: return "smooth_bumps";
  case PhantomKind::piecewise_constant_1d: return "piecewise_constant_1d";
  }
  return "?";
}

namespace {

// Pixel-centre coordinates on [-1, 1]; v points up (row 0 is the top).
double grid_u(std::size_t c, std::size_t cols) {
  return (2.0 * static_cast<double>(c) + 1.0) / static_cast<double>(cols) - 1.0;
}
double grid_v(std::size_t r, std::size_t rows) {
  return 1.0 - (2.0 * static_cast<double>(r) + 1.0) / static_cast<double>(rows);
}

struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan (Toft) parameters.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

double smooth_phase(double u, double v) {
  return 0.35 * std::numbers::pi * (0.6 * u + 0.4 * v) +
         0.25 * std::sin(std::numbers::pi * u * v);
}

void normalize_peak(std::vector<double> &mag) {
  const double peak = *std::max_element(mag.begin(), mag.end());
  if (peak > 0.0)
    for (auto &m : mag) m /= peak;
}

} // namespace

ComplexImage make_phantom(PhantomKind kind, Shape shape) {
  if (shape.size() == 0) throw ArgumentError("make_phantom: empty shape");
  std::vector<double> mag(shape.size(), 0.0);
  std::vector<double> phase(shape.size(), 0.0);

  switch (kind) {
  case PhantomKind::shepp_logan_like: {
    if (shape.is_1d())
      throw ArgumentError("make_phantom: shepp_logan_like needs a 2D shape");
    for (std::size_t r = 0; r < shape.rows; ++r)
      for (std::size_t c = 0; c < shape.cols; ++c) {
        const double u = grid_u(c, shape.cols), v = grid_v(r, shape.rows);
        double val = 0.0;
        for (const auto &e : kSheppLogan) {
          const double th = e.phi_deg * std::numbers::pi / 180.0;
          const double du = u - e.x0, dv = v - e.y0;
          const double p = (du * std::cos(th) + dv * std::sin(th)) / e.a;
          const double q = (-du * std::sin(th) + dv * std::cos(th)) / e.b;
          if (p * p + q * q <= 1.0) val += e.intensity;
        }
        mag[r * shape.cols + c] = std::max(val, 0.0);
        phase[r * shape.cols + c] = smooth_phase(u, v);
      }
    break;
  }
  case PhantomKind::smooth_bumps: {
    struct Bump { double amp, u, v, w; };
    constexpr std::array<Bump, 4> bumps{{{1.0, -0.3, 0.2, 0.35},
                                         {0.7, 0.35, 0.3, 0.25},
                                         {0.5, 0.1, -0.4, 0.3},
                                         {0.4, -0.5, -0.5, 0.2}}};
    for (std::size_t r = 0; r < shape.rows; ++r)
      for (std::size_t c = 0; c < shape.cols; ++c) {
        const double u = shape.is_1d() ? grid_v(r, shape.rows) * -1.0
                                       : grid_u(c, shape.cols);
        const double v = shape.is_1d() ? 0.0 : grid_v(r, shape.rows);
        double val = 0.0;
        for (const auto &b : bumps) {
          const double d2 = (u - b.u) * (u - b.u) +
                            (shape.is_1d() ? 0.0 : (v - b.v) * (v - b.v));
          val += b.amp * std::exp(-d2 / (2.0 * b.w * b.w));
        }
        mag[r * shape.cols + c] = val;
        phase[r * shape.cols + c] = smooth_phase(u, v);
      }
    break;
  }
  case PhantomKind::piecewise_constant_1d: {
    if (!shape.is_1d())
      throw ArgumentError("make_phantom: piecewise_constant_1d needs cols == 1");
    // (end fraction, level)
    constexpr std::array<std::pair<double, double>, 6> plateaus{{
        {0.15, 0.0}, {0.35, 0.6}, {0.5, 1.0}, {0.7, 0.3}, {0.85, 0.8}, {1.0, 0.1}}};
    for (std::size_t r = 0; r < shape.rows; ++r) {
      const double t = (static_cast<double>(r) + 0.5) / static_cast<double>(shape.rows);
      for (const auto &[end, level] : plateaus)
        if (t < end) {
          mag[r] = level;
          break;
        }
      phase[r] = 0.3 * std::numbers::pi * std::sin(std::numbers::pi * t);
    }
    break;
  }
  }

  normalize_peak(mag);
  ComplexImage x(shape);
  for (std::size_t i = 0; i < shape.size(); ++i)
    x[i] = mag[i] == 0.0 ? cplx{0.0, 0.0} : std::polar(mag[i], phase[i]);
  return x;
}

// ---------------------------------------------------------------- coil maps

CoilProfile parse_coil_profile(std::string_view s) {
  if (s == "uniform") return CoilProfile::uniform;
  if (s == "gaussian_lobes") return CoilProfile::gaussian_lobes;
  throw ArgumentError("unsupported coil profile: " + std::string(s));
}

std::string_view to_string(CoilProfile p) {
  return p == CoilProfile::uniform ? "uniform" : "gaussian_lobes";
}

CoilSensitivities make_coil_maps(int num_coils, Shape shape, CoilProfile profile) {
  if (num_coils < 1) throw ArgumentError("make_coil_maps: num_coils must be >= 1");
  if (shape.size() == 0) throw ArgumentError("make_coil_maps: empty shape");
  const auto nc = static_cast<std::size_t>(num_coils);
  std::vector<ComplexImage> maps(nc, ComplexImage(shape));

  if (profile == CoilProfile::uniform) {
    const double level = 1.0 / std::sqrt(static_cast<double>(nc));
    for (auto &m : maps)
      for (auto &v : m.values()) v = cplx{level, 0.0};
    return CoilSensitivities(std::move(maps));
  }

  constexpr double width = 0.6;
  for (std::size_t c = 0; c < nc; ++c) {
    double cu, cv;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(nc);
    if (shape.is_1d()) {
      cu = nc == 1 ? 0.0
                   : -0.8 + 1.6 * static_cast<double>(c) /
                                static_cast<double>(nc - 1);
      cv = 0.0;
    } else {
      cu = 0.8 * std::cos(angle + std::numbers::pi / 4.0);
      cv = 0.8 * std::sin(angle + std::numbers::pi / 4.0);
    }
    for (std::size_t r = 0; r < shape.rows; ++r)
      for (std::size_t col = 0; col < shape.cols; ++col) {
        const double u = shape.is_1d() ? -grid_v(r, shape.rows) : grid_u(col, shape.cols);
        const double v = shape.is_1d() ? 0.0 : grid_v(r, shape.rows);
        const double d2 = (u - cu) * (u - cu) + (v - cv) * (v - cv);
        const double amp = std::exp(-d2 / (2.0 * width * width));
        const double ph = angle + 0.5 * (u * std::cos(angle) + v * std::sin(angle));
        maps[c].at(r, col) = std::polar(amp, ph);
      }
  }
  for (std::size_t i = 0; i < shape.size(); ++i) {
    double sos = 0.0;
    for (const auto &m : maps) sos += std::norm(m[i]);
    const double inv = 1.0 / std::sqrt(sos);
    for (auto &m : maps) m[i] *= inv;
  }
  return CoilSensitivities(std::move(maps));
}

} // namespace adasamp
