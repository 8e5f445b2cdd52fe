#include "adasamp/priors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "adasamp/array_io.hpp"
#include "adasamp/rng.hpp"

namespace adasamp {

// ---------------------------------------------------------------- T

Shape RoughnessTransform::output_shape() const {
  return shape_.is_1d() ? shape_ : Shape{2 * shape_.rows, shape_.cols};
}

ComplexImage RoughnessTransform::apply(const ComplexImage &x) const {
  require_same_shape(x.shape(), shape_, "RoughnessTransform::apply");
  const std::size_t R = shape_.rows, C = shape_.cols;
  ComplexImage d(output_shape());
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c)
      d.at(r, c) = x.at((r + 1) % R, c) - x.at(r, c);
  if (!shape_.is_1d())
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c)
        d.at(R + r, c) = x.at(r, (c + 1) % C) - x.at(r, c);
  return d;
}

ComplexImage RoughnessTransform::apply_adjoint(const ComplexImage &d) const {
  require_same_shape(d.shape(), output_shape(), "RoughnessTransform::apply_adjoint");
  const std::size_t R = shape_.rows, C = shape_.cols;
  ComplexImage x(shape_);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c)
      x.at(r, c) = d.at((r + R - 1) % R, c) - d.at(r, c);
  if (!shape_.is_1d())
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c)
        x.at(r, c) += d.at(R + r, (c + C - 1) % C) - d.at(R + r, c);
  return x;
}

ComplexImage RoughnessTransform::apply_gram(const ComplexImage &x) const {
  require_same_shape(x.shape(), shape_, "RoughnessTransform::apply_gram");
  const std::size_t R = shape_.rows, C = shape_.cols;
  ComplexImage out(shape_);
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t up = (r + R - 1) % R, dn = (r + 1) % R;
    for (std::size_t c = 0; c < C; ++c) {
      cplx v = 2.0 * x.at(r, c) - x.at(up, c) - x.at(dn, c);
      if (!shape_.is_1d())
        v += 2.0 * x.at(r, c) - x.at(r, (c + C - 1) % C) - x.at(r, (c + 1) % C);
      out.at(r, c) = v;
    }
  }
  return out;
}

ComplexImage apply_T(const ComplexImage &x) {
  return RoughnessTransform(x.shape()).apply(x);
}

// ---------------------------------------------------------------- dataset

PatchDataset::PatchDataset(std::vector<ComplexImage> p) : patches(std::move(p)) {
  if (patches.empty()) throw ArgumentError("PatchDataset: empty dataset");
  for (const auto &q : patches)
    require_same_shape(q.shape(), patches.front().shape(), "PatchDataset");
}

PriorKind parse_prior_kind(std::string_view s) {
  if (s == "roughness") return PriorKind::roughness;
  if (s == "empirical") return PriorKind::empirical;
  throw ArgumentError("unknown prior kind: " + std::string(s));
}

std::string_view to_string(PriorKind k) {
  return k == PriorKind::roughness ? "roughness" : "empirical";
}

// ---------------------------------------------------------------- scores

ComplexImage score_roughness(const ComplexImage &x, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("score_roughness: lambda must be > 0");
  ComplexImage g = RoughnessTransform(x.shape()).apply_gram(x);
  g *= -lambda;
  return g;
}

namespace {

// Softmax weights of the kernel mixture at x, computed in log space.
std::vector<double> mixture_weights(const EmpiricalPrior &p, const ComplexImage &x,
                                    double *log_sum = nullptr) {
  const double inv2h2 = 1.0 / (2.0 * p.bandwidth * p.bandwidth);
  std::vector<double> logw(p.data.patches.size());
  for (std::size_t j = 0; j < logw.size(); ++j) {
    double d2 = 0.0;
    const auto &mu = p.data.patches[j];
    for (std::size_t i = 0; i < x.size(); ++i) d2 += std::norm(x[i] - mu[i]);
    logw[j] = -d2 * inv2h2;
  }
  const double m = *std::max_element(logw.begin(), logw.end());
  double s = 0.0;
  for (auto &l : logw) {
    l = std::exp(l - m);
    s += l;
  }
  for (auto &l : logw) l /= s;
  if (log_sum) *log_sum = m + std::log(s);
  return logw;
}

ComplexImage score_empirical(const EmpiricalPrior &p, const ComplexImage &x) {
  require_same_shape(x.shape(), p.data.shape(), "empirical score");
  const auto w = mixture_weights(p, x);
  const double inv_h2 = 1.0 / (p.bandwidth * p.bandwidth);
  ComplexImage g(x.shape());
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0.0) continue;
    const auto &mu = p.data.patches[j];
    for (std::size_t i = 0; i < x.size(); ++i) g[i] += w[j] * (mu[i] - x[i]);
  }
  g *= inv_h2;
  return g;
}

} // namespace

ScoreFunction::ScoreFunction(RoughnessPrior p) : impl_(p) {
  if (!(p.lambda > 0.0)) throw ArgumentError("roughness prior: lambda must be > 0");
}

ScoreFunction::ScoreFunction(EmpiricalPrior p) : impl_(std::move(p)) {
  const auto &e = std::get<EmpiricalPrior>(impl_);
  if (e.data.patches.empty()) throw ArgumentError("empirical prior: empty dataset");
  if (!(e.bandwidth > 0.0))
    throw ArgumentError("empirical prior: bandwidth must be > 0");
}

PriorKind ScoreFunction::kind() const {
  return std::holds_alternative<RoughnessPrior>(impl_) ? PriorKind::roughness
                                                       : PriorKind::empirical;
}

ComplexImage ScoreFunction::operator()(const ComplexImage &x) const {
  if (const auto *r = roughness()) return score_roughness(x, r->lambda);
  return score_empirical(*empirical(), x);
}

double ScoreFunction::log_prior(const ComplexImage &x) const {
  if (const auto *r = roughness()) {
    const double n = apply_T(x).norm();
    return -0.5 * r->lambda * n * n;
  }
  require_same_shape(x.shape(), empirical()->data.shape(), "empirical log_prior");
  double ls = 0.0;
  mixture_weights(*empirical(), x, &ls);
  return ls;
}

ScoreFunction fit_empirical_score(PatchDataset data, double bandwidth) {
  if (data.patches.empty()) throw ArgumentError("fit_empirical_score: empty dataset");
  if (!(bandwidth > 0.0))
    throw ArgumentError("fit_empirical_score: bandwidth must be > 0");
  return ScoreFunction(EmpiricalPrior{std::move(data), bandwidth});
}

ComplexImage eval_score(const ScoreFunction &f, const ComplexImage &x) {
  if (!x.all_finite()) throw ArgumentError("eval_score: non-finite input");
  if (const auto *e = f.empirical())
    require_same_shape(x.shape(), e->data.shape(), "eval_score");
  ComplexImage g = f(x);
  if (!g.all_finite()) throw NumericalError("eval_score: non-finite score");
  return g;
}

// ---------------------------------------------------------------- data

PatchDataset make_training_set(PhantomKind kind, Shape shape, std::size_t count,
                               std::uint64_t seed) {
  if (count == 0) throw ArgumentError("make_training_set: count must be > 0");
  const ComplexImage base = make_phantom(kind, shape);
  Rng rng = make_rng(seed);
  const long max_shift = std::max<long>(1, static_cast<long>(shape.rows) / 16);
  std::uniform_int_distribution<long> shift(-max_shift, max_shift);
  std::uniform_real_distribution<double> amp(0.8, 1.2);
  std::vector<ComplexImage> patches;
  patches.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const long dr = shift(rng);
    const long dc = shape.is_1d() ? 0 : shift(rng);
    const double a = amp(rng);
    ComplexImage p(shape);
    const long R = static_cast<long>(shape.rows), C = static_cast<long>(shape.cols);
    for (long r = 0; r < R; ++r)
      for (long c = 0; c < C; ++c)
        p.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
            a * base.at(static_cast<std::size_t>(((r - dr) % R + R) % R),
                        static_cast<std::size_t>(((c - dc) % C + C) % C));
    patches.push_back(std::move(p));
  }
  return PatchDataset(std::move(patches));
}

void save_empirical_prior(const std::filesystem::path &stem,
                          const EmpiricalPrior &p) {
  const Shape ps = p.data.shape();
  const std::size_t m = p.data.patches.size();
  ComplexImage stacked({m * ps.rows, ps.cols});
  for (std::size_t j = 0; j < m; ++j)
    std::copy(p.data.patches[j].values().begin(), p.data.patches[j].values().end(),
              stacked.values().begin() + static_cast<std::ptrdiff_t>(j * ps.size()));
  std::filesystem::path patches = stem;
  patches += "_patches";
  io::write_array(patches, stacked);

  nlohmann::json header = {{"kind", "empirical"},
                           {"bandwidth", p.bandwidth},
                           {"num_patches", m},
                           {"patch_shape", {ps.rows, ps.cols}}};
  std::filesystem::path hp = stem;
  hp += ".json";
  std::ofstream out(hp);
  if (!out) throw io::IoError("cannot write " + hp.string());
  out << header.dump(2) << '\n';
}

EmpiricalPrior load_empirical_prior(const std::filesystem::path &stem) {
  std::filesystem::path hp = stem;
  hp += ".json";
  std::ifstream in(hp);
  if (!in) throw io::IoError("cannot open " + hp.string());
  const auto header = nlohmann::json::parse(in);
  if (header.at("kind") != "empirical")
    throw io::IoError("prior header kind is not 'empirical'");
  const Shape ps{header.at("patch_shape").at(0).get<std::size_t>(),
                 header.at("patch_shape").at(1).get<std::size_t>()};
  const auto m = header.at("num_patches").get<std::size_t>();
  std::filesystem::path patches = stem;
  patches += "_patches";
  const ComplexImage stacked = io::read_complex_array(patches);
  if (stacked.size() != m * ps.size())
    throw io::IoError("prior patch array size does not match header");
  std::vector<ComplexImage> out;
  for (std::size_t j = 0; j < m; ++j)
    out.emplace_back(ps, std::vector<cplx>(
                             stacked.values().begin() + static_cast<std::ptrdiff_t>(j * ps.size()),
                             stacked.values().begin() + static_cast<std::ptrdiff_t>((j + 1) * ps.size())));
  return EmpiricalPrior{PatchDataset(std::move(out)), header.at("bandwidth").get<double>()};
}

} // namespace adasamp
