#include "adasamp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "adasamp/array_io.hpp"
#include "adasamp/rng.hpp"

namespace adasamp {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

std::size_t ExperimentConfig::grid_units() const {
  return policy.mode == SamplingMode::line ? shape.cols : shape.size();
}

std::size_t ExperimentConfig::final_budget() const {
  if (!(undersampling_ratio >= 1.0))
    throw ArgumentError("config: undersampling_ratio must be >= 1");
  const auto units = static_cast<double>(grid_units());
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(units / undersampling_ratio)));
}

std::size_t ExperimentConfig::resolved_n_add() const {
  if (n_add) return *n_add;
  // Without an explicit n_add the initial mask takes 40% of the budget.
  const std::size_t fin = final_budget();
  const auto initial = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(0.4 * static_cast<double>(fin))));
  return (fin - std::min(fin, initial)) / policy.batch_size;
}

std::size_t ExperimentConfig::initial_budget() const {
  const std::size_t fin = final_budget();
  const std::size_t added = resolved_n_add() * policy.batch_size;
  if (added >= fin)
    throw ArgumentError("config: n_add * batch_size (" + std::to_string(added) +
                        ") leaves no initial samples within the final budget " +
                        std::to_string(fin));
  return fin - added;
}

void ExperimentConfig::validate() const {
  if (shape.size() == 0) throw ArgumentError("config: empty grid");
  if (num_coils < 1) throw ArgumentError("config: coils.count must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ArgumentError("config: noise_sigma must be >= 0");
  if (prior == PriorKind::roughness && !(lambda > 0.0))
    throw ArgumentError("config: prior.lambda must be > 0");
  if (prior == PriorKind::empirical && (!(bandwidth > 0.0) || training_patches == 0))
    throw ArgumentError("config: empirical prior needs bandwidth > 0 and patches > 0");
  if (policy.batch_size < 1) throw ArgumentError("config: policy.batch_size must be >= 1");
  if (n_samples < 2) throw ArgumentError("config: sgld.n_samples must be >= 2");
  if (final_budget() > grid_units())
    throw ArgumentError("config: final budget exceeds grid size");
  (void)initial_budget();
  sgld().validate();
  if (pilot_frames < 1) throw ArgumentError("config: pilot.frames must be >= 1");
}

SGLDConfig ExperimentConfig::sgld() const {
  SGLDConfig c;
  c.n_steps = n_steps;
  c.n_samples = n_samples;
  c.mu = n_steps ? make_schedule(mu.kind, n_steps, mu.start, mu.end) : Schedule{};
  c.eta = n_steps ? make_schedule(eta.kind, n_steps, eta.start, eta.end) : Schedule{};
  c.init = init;
  c.init_noise_std = init_noise_std;
  c.rng_seed = derive_seed(seed, "sgld");
  return c;
}

namespace {

ScheduleParams schedule_from_json(const json &j, ScheduleParams def) {
  if (j.is_number()) return {ScheduleKind::constant, j.get<double>(), j.get<double>()};
  ScheduleParams s = def;
  s.kind = parse_schedule_kind(j.value("kind", std::string(to_string(def.kind))));
  s.start = j.value("start", def.start);
  s.end = j.value("end", s.kind == ScheduleKind::constant ? s.start : def.end);
  return s;
}

json schedule_to_json(const ScheduleParams &s) {
  return {{"kind", to_string(s.kind)}, {"start", s.start}, {"end", s.end}};
}

} // namespace

ExperimentConfig config_from_json(const json &j) {
  ExperimentConfig c;
  if (auto p = j.find("phantom"); p != j.end()) {
    c.phantom = parse_phantom_kind(p->value("kind", std::string(to_string(c.phantom))));
    c.shape.rows = p->value("rows", c.shape.rows);
    c.shape.cols = p->value("cols", c.shape.cols);
  }
  if (auto p = j.find("coils"); p != j.end()) {
    c.num_coils = p->value("count", c.num_coils);
    c.coil_profile = parse_coil_profile(p->value("profile", std::string(to_string(c.coil_profile))));
  }
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  if (auto p = j.find("prior"); p != j.end()) {
    c.prior = parse_prior_kind(p->value("kind", std::string(to_string(c.prior))));
    c.lambda = p->value("lambda", c.lambda);
    c.bandwidth = p->value("bandwidth", c.bandwidth);
    c.training_patches = p->value("num_patches", c.training_patches);
  }
  if (auto p = j.find("sgld"); p != j.end()) {
    c.n_steps = p->value("n_steps", c.n_steps);
    c.n_samples = p->value("n_samples", c.n_samples);
    if (p->contains("mu")) c.mu = schedule_from_json(p->at("mu"), c.mu);
    if (p->contains("eta")) c.eta = schedule_from_json(p->at("eta"), c.eta);
    c.init = parse_init_kind(p->value("init", std::string(to_string(c.init))));
    if (p->contains("init_noise_std") && !p->at("init_noise_std").is_null())
      c.init_noise_std = p->at("init_noise_std").get<double>();
  }
  if (auto p = j.find("policy"); p != j.end()) {
    c.policy.mode = parse_sampling_mode(p->value("mode", std::string(to_string(c.policy.mode))));
    c.policy.batch_size = p->value("batch_size", c.policy.batch_size);
  }
  if (auto p = j.find("budget"); p != j.end()) {
    c.undersampling_ratio = p->value("undersampling_ratio", c.undersampling_ratio);
    if (p->contains("n_add")) {
      if (p->at("n_add").is_null())
        c.n_add.reset();
      else
        c.n_add = p->at("n_add").get<std::size_t>();
    }
    c.initial_mask = parse_baseline_kind(
        p->value("initial_mask", std::string(to_string(c.initial_mask))));
  }
  if (auto p = j.find("baselines"); p != j.end()) {
    c.baselines.clear();
    for (const auto &b : *p) c.baselines.push_back(parse_baseline_kind(b.get<std::string>()));
  }
  if (auto p = j.find("pilot"); p != j.end()) {
    c.pilot_frames = p->value("frames", c.pilot_frames);
    c.bump_amplitude = p->value("bump_amplitude", c.bump_amplitude);
  }
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  return c;
}

json to_json(const ExperimentConfig &c) {
  json baselines = json::array();
  for (auto b : c.baselines) baselines.push_back(to_string(b));
  json sgld = {{"n_steps", c.n_steps},
               {"n_samples", c.n_samples},
               {"mu", schedule_to_json(c.mu)},
               {"eta", schedule_to_json(c.eta)},
               {"init", to_string(c.init)},
               {"init_noise_std", c.init_noise_std ? json(*c.init_noise_std) : json(nullptr)}};
  // threads and output_dir do not affect results and are left out.
  return {{"phantom", {{"kind", to_string(c.phantom)}, {"rows", c.shape.rows}, {"cols", c.shape.cols}}},
          {"coils", {{"count", c.num_coils}, {"profile", to_string(c.coil_profile)}}},
          {"noise_sigma", c.noise_sigma},
          {"prior", {{"kind", to_string(c.prior)}, {"lambda", c.lambda},
                     {"bandwidth", c.bandwidth}, {"num_patches", c.training_patches}}},
          {"sgld", sgld},
          {"policy", {{"mode", to_string(c.policy.mode)}, {"batch_size", c.policy.batch_size}}},
          {"budget", {{"undersampling_ratio", c.undersampling_ratio},
                      {"n_add", c.n_add ? json(*c.n_add) : json(nullptr)},
                      {"initial_mask", to_string(c.initial_mask)}}},
          {"baselines", baselines},
          {"pilot", {{"frames", c.pilot_frames}, {"bump_amplitude", c.bump_amplitude}}},
          {"seed", c.seed}};
}

ExperimentConfig load_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config " + path.string());
  return config_from_json(json::parse(in));
}

// ---------------------------------------------------------------- metrics

double psnr(const ComplexImage &reference, const ComplexImage &estimate) {
  require_same_shape(reference.shape(), estimate.shape(), "psnr");
  const double peak = reference.max_abs();
  if (!(peak > 0.0)) throw ArgumentError("psnr: reference is identically zero");
  double mse = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = std::abs(reference[i]) - std::abs(estimate[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(reference.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

ComplexImage reconstruct_final(const PosteriorEnsemble &ens) {
  if (ens.images.empty()) throw ArgumentError("reconstruct_final: empty ensemble");
  ComplexImage mean(ens.images.front().shape());
  for (const auto &x : ens.images) mean += x;
  mean *= 1.0 / static_cast<double>(ens.images.size());
  return mean;
}

ScoreFunction build_score(const ExperimentConfig &cfg) {
  if (cfg.prior == PriorKind::roughness) return ScoreFunction(RoughnessPrior{cfg.lambda});
  return fit_empirical_score(make_training_set(cfg.phantom, cfg.shape, cfg.training_patches,
                                               derive_seed(cfg.seed, "training")),
                             cfg.bandwidth);
}

SensingOperator build_operator(const ExperimentConfig &cfg) {
  return SensingOperator(SamplingMask(cfg.shape, cfg.policy.mode),
                         make_coil_maps(cfg.num_coils, cfg.shape, cfg.coil_profile),
                         cfg.noise_sigma);
}

// ---------------------------------------------------------------- report

const MethodResult &ExperimentReport::method(const std::string &name,
                                             std::size_t frame) const {
  for (const auto &m : methods)
    if (m.name == name && m.frame == frame) return m;
  throw ArgumentError("report has no method '" + name + "' for frame " +
                      std::to_string(frame));
}

namespace {

std::string method_stem(const MethodResult &m) {
  return m.name + "_f" + std::to_string(m.frame);
}

double scored_psnr(const ComplexImage &ref, const ComplexImage &est) {
  return psnr(io::quantize_f32(ref), io::quantize_f32(est));
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Non-adaptive arm: measure with `mask`, sample, take the posterior mean.
ComplexImage reconstruct_with_mask(const ComplexImage &truth, const SensingOperator &op_template,
                                   const SamplingMask &mask, const ScoreFunction &score,
                                   SGLDConfig sgld, std::uint64_t measure_seed,
                                   std::uint64_t chain_seed, unsigned threads) {
  const AcquisitionState s = initial_state(truth, op_template, mask, measure_seed);
  sgld.rng_seed = chain_seed;
  return reconstruct_final(sample_posterior_ensemble(
      s.measurements, op_template.with_mask(s.mask), score, sgld, threads));
}

} // namespace

json ExperimentReport::to_json() const {
  json methods_j = json::array();
  for (const auto &m : methods)
    methods_j.push_back({{"name", m.name},
                         {"frame", m.frame},
                         {"psnr_db", m.psnr_db},
                         {"sample_count", m.mask.count()},
                         {"mask", "mask_" + method_stem(m)},
                         {"reconstruction", "recon_" + method_stem(m)}});
  json refs = json::array();
  for (std::size_t f = 0; f < references.size(); ++f)
    refs.push_back("reference_f" + std::to_string(f + 1));
  return {{"config", adasamp::to_json(config)},
          {"seed", config.seed},
          {"grid", {config.shape.rows, config.shape.cols}},
          {"budget", {{"final", config.final_budget()},
                      {"initial", config.initial_budget()},
                      {"n_add", config.resolved_n_add()},
                      {"batch_size", config.policy.batch_size},
                      {"unit", config.policy.mode == SamplingMode::line ? "line" : "point"}}},
          {"references", refs},
          {"methods", methods_j},
          {"history", history.empty() ? json(nullptr) : json("history.csv")},
          {"final_variance", final_variance ? json("variance_adaptive") : json(nullptr)}};
}

void write_report(const ExperimentReport &r, const fs::path &dir) {
  fs::create_directories(dir);
  for (std::size_t f = 0; f < r.references.size(); ++f) {
    const std::string stem = "reference_f" + std::to_string(f + 1);
    io::write_array(dir / stem, r.references[f]);
    io::write_pgm(dir / (stem + ".pgm"), magnitude(r.references[f]));
  }
  for (const auto &m : r.methods) {
    const std::string stem = method_stem(m);
    io::write_mask(dir / ("mask_" + stem), m.mask);
    RealGrid g(m.mask.shape());
    for (std::size_t n : m.mask.acquired()) g[n] = 1.0;
    io::write_pgm(dir / ("mask_" + stem + ".pgm"), g);
    io::write_array(dir / ("recon_" + stem), m.reconstruction);
    io::write_pgm(dir / ("recon_" + stem + ".pgm"), magnitude(m.reconstruction));
  }
  if (r.final_variance) {
    io::write_array(dir / "variance_adaptive", *r.final_variance);
    io::write_pgm(dir / "variance_adaptive.pgm", *r.final_variance);
  }
  {
    std::ofstream out(dir / "report.json");
    out << r.to_json().dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "metrics.csv");
    out << "method,frame,psnr_db,sample_count\n";
    for (const auto &m : r.methods)
      out << m.name << ',' << m.frame << ',' << fmt_double(m.psnr_db) << ','
          << m.mask.count() << '\n';
  }
  {
    std::ofstream out(dir / "history.csv");
    out << "iteration,selected_index,variance_at_selection\n";
    for (const auto &h : r.history)
      for (std::size_t k = 0; k < h.selected.size(); ++k)
        out << h.iteration << ',' << h.selected[k] << ','
            << fmt_double(h.variance_at_selection[k]) << '\n';
  }
  {
    json t = json::object();
    for (const auto &[k, v] : r.timings_s) t[k] = v;
    std::ofstream out(dir / "timings.json");
    out << t.dump(2) << '\n';
  }
}

// ---------------------------------------------------------------- experiments

ExperimentReport run_experiment(const ExperimentConfig &cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;

  const ComplexImage truth = make_phantom(cfg.phantom, cfg.shape);
  report.references.push_back(truth);
  const SensingOperator op = build_operator(cfg);
  const ScoreFunction score = build_score(cfg);
  const SGLDConfig sgld = cfg.sgld();
  const std::size_t budget = cfg.final_budget();

  for (std::size_t b = 0; b < cfg.baselines.size(); ++b) {
    const auto t0 = Clock::now();
    const BaselineKind kind = cfg.baselines[b];
    const std::string name(to_string(kind));
    SamplingMask mask = make_baseline_mask(kind, cfg.shape, budget,
                                           derive_seed(cfg.seed, "baseline", b),
                                           cfg.policy.mode);
    ComplexImage recon = reconstruct_with_mask(
        truth, op, mask, score, sgld, derive_seed(cfg.seed, "measure", b),
        derive_seed(cfg.seed, "recon", b), cfg.threads);
    const double p = scored_psnr(truth, recon);
    report.methods.push_back({name, 1, p, std::move(mask), std::move(recon)});
    report.timings_s.emplace_back(name, seconds_since(t0));
  }

  const auto t0 = Clock::now();
  const SamplingMask initial = make_baseline_mask(
      cfg.initial_mask, cfg.shape, cfg.initial_budget(),
      derive_seed(cfg.seed, "initial"), cfg.policy.mode);
  AdaptiveOptions opts{derive_seed(cfg.seed, "adaptive"), cfg.threads, false};
  AdaptiveResult ad = run_adaptive_acquisition(truth, op, score, sgld, cfg.policy,
                                               cfg.resolved_n_add(), initial, opts);
  ComplexImage recon = reconstruct_final(ad.ensemble);
  if (ad.ensemble.size() >= 2) report.final_variance = compute_variance_map(ad.ensemble);
  const double p = scored_psnr(truth, recon);
  report.history = std::move(ad.state.history);
  report.methods.push_back({"adaptive", 1, p, std::move(ad.state.mask), std::move(recon)});
  report.timings_s.emplace_back("adaptive", seconds_since(t0));

  if (!cfg.output_dir.empty()) write_report(report, cfg.output_dir);
  return report;
}

std::vector<ComplexImage> make_pilot_frames(const ExperimentConfig &cfg) {
  const ComplexImage base = make_phantom(cfg.phantom, cfg.shape);
  std::vector<ComplexImage> frames{base};
  const Shape s = cfg.shape;
  for (std::size_t f = 1; f < cfg.pilot_frames; ++f) {
    ComplexImage x = base;
    const double amp = cfg.bump_amplitude * static_cast<double>(f);
    for (std::size_t r = 0; r < s.rows; ++r)
      for (std::size_t c = 0; c < s.cols; ++c) {
        const double v = (static_cast<double>(r) + 0.5) / static_cast<double>(s.rows) - 0.4;
        const double u = s.is_1d() ? 0.0
                                   : (static_cast<double>(c) + 0.5) / static_cast<double>(s.cols) - 0.6;
        x.at(r, c) += amp * std::exp(-(u * u + v * v) / (2.0 * 0.06 * 0.06));
      }
    frames.push_back(std::move(x));
  }
  return frames;
}

ExperimentReport run_pilot_transfer(const ExperimentConfig &cfg,
                                    const std::vector<ComplexImage> &frames) {
  cfg.validate();
  if (frames.empty()) throw ArgumentError("run_pilot_transfer: need at least the pilot frame");
  for (const auto &f : frames) require_same_shape(f.shape(), cfg.shape, "run_pilot_transfer frame");

  ExperimentReport report;
  report.config = cfg;
  report.references = frames;
  const SensingOperator op = build_operator(cfg);
  const ScoreFunction score = build_score(cfg);
  const SGLDConfig sgld = cfg.sgld();
  const std::size_t budget = cfg.final_budget();

  auto t0 = Clock::now();
  const SamplingMask initial = make_baseline_mask(
      cfg.initial_mask, cfg.shape, cfg.initial_budget(),
      derive_seed(cfg.seed, "initial"), cfg.policy.mode);
  AdaptiveOptions opts{derive_seed(cfg.seed, "adaptive"), cfg.threads, false};
  AdaptiveResult ad = run_adaptive_acquisition(frames.front(), op, score, sgld, cfg.policy,
                                               cfg.resolved_n_add(), initial, opts);
  if (ad.ensemble.size() >= 2) report.final_variance = compute_variance_map(ad.ensemble);
  const SamplingMask frozen = ad.state.mask;
  report.history = std::move(ad.state.history);
  {
    ComplexImage recon = reconstruct_final(ad.ensemble);
    const double p = scored_psnr(frames.front(), recon);
    report.methods.push_back({"adaptive_online", 1, p, frozen, std::move(recon)});
  }
  report.timings_s.emplace_back("pilot_design", seconds_since(t0));

  std::vector<std::pair<std::string, SamplingMask>> arms{{"adaptive_frozen", frozen}};
  for (std::size_t b = 0; b < cfg.baselines.size(); ++b)
    arms.emplace_back(std::string(to_string(cfg.baselines[b])),
                      make_baseline_mask(cfg.baselines[b], cfg.shape, budget,
                                         derive_seed(cfg.seed, "baseline", b),
                                         cfg.policy.mode));

  // Seeds depend on the arm only, so identical frames reconstruct identically.
  t0 = Clock::now();
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (std::size_t a = 0; a < arms.size(); ++a) {
      ComplexImage recon = reconstruct_with_mask(
          frames[f], op, arms[a].second, score, sgld,
          derive_seed(cfg.seed, "pilot_measure", a),
          derive_seed(cfg.seed, "pilot_recon", a), cfg.threads);
      const double p = scored_psnr(frames[f], recon);
      report.methods.push_back({arms[a].first, f + 1, p, arms[a].second, std::move(recon)});
    }
  report.timings_s.emplace_back("frame_reconstructions", seconds_since(t0));

  if (!cfg.output_dir.empty()) write_report(report, cfg.output_dir);
  return report;
}

} // namespace adasamp
