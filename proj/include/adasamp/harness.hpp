#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adasamp/adaptive.hpp"
#include "adasamp/forward_model.hpp"
#include "adasamp/priors.hpp"
#include "adasamp/sgld.hpp"

namespace adasamp {

struct ScheduleParams {
  ScheduleKind kind = ScheduleKind::constant;
  double start = 1e-3;
  double end = 1e-3;
};

struct ExperimentConfig {
  PhantomKind phantom = PhantomKind::shepp_logan_like;
  Shape shape{64, 64};

  int num_coils = 1;
  CoilProfile coil_profile = CoilProfile::uniform;
  double noise_sigma = 0.01;

  PriorKind prior = PriorKind::roughness;
  double lambda = 300.0;
  double bandwidth = 1.0;
  std::size_t training_patches = 16;

  std::size_t n_steps = 100;
  std::size_t n_samples = 8;
  ScheduleParams mu{ScheduleKind::constant, 1e-4, 1e-4};
  ScheduleParams eta{ScheduleKind::constant, 1e4, 1e4};
  InitKind init = InitKind::adjoint_plus_noise;
  std::optional<double> init_noise_std;

  SelectionPolicy policy{10, SamplingMode::pointwise};
  double undersampling_ratio = 10.0;
  std::optional<std::size_t> n_add = 30;
  BaselineKind initial_mask = BaselineKind::low_frequency;
  std::vector<BaselineKind> baselines{BaselineKind::uniform_random,
                                      BaselineKind::poisson_disk};

  // Pilot-transfer frames: frame j >= 2 adds a Gaussian bump of amplitude
  // bump_amplitude * (j - 1) to the phantom.
  std::size_t pilot_frames = 2;
  double bump_amplitude = 0.1;

  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::filesystem::path output_dir;

  // Sampling units: pixels, or columns in line mode.
  std::size_t grid_units() const;
  std::size_t final_budget() const;
  std::size_t resolved_n_add() const;
  std::size_t initial_budget() const;

  void validate() const;
  SGLDConfig sgld() const;
};

ExperimentConfig config_from_json(const nlohmann::json &j);
nlohmann::json to_json(const ExperimentConfig &cfg);
ExperimentConfig load_config(const std::filesystem::path &path);

// 10 log10(peak^2 / MSE) on magnitudes, peak = max |reference|; 200 dB cap.
double psnr(const ComplexImage &reference, const ComplexImage &estimate);
constexpr double kPsnrCap = 200.0;

// Pointwise complex mean of the ensemble members.
ComplexImage reconstruct_final(const PosteriorEnsemble &ens);

ScoreFunction build_score(const ExperimentConfig &cfg);
SensingOperator build_operator(const ExperimentConfig &cfg);

struct MethodResult {
  std::string name;
  std::size_t frame = 1; // 1-based frame the reconstruction belongs to
  double psnr_db = 0.0;
  SamplingMask mask;
  ComplexImage reconstruction;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ComplexImage> references; // ground truth per frame
  std::vector<MethodResult> methods;
  std::vector<HistoryEntry> history;    // adaptive selection history
  std::optional<RealGrid> final_variance;
  std::vector<std::pair<std::string, double>> timings_s;

  const MethodResult &method(const std::string &name, std::size_t frame = 1) const;
  // Deterministic summary; excludes wall-clock timings.
  nlohmann::json to_json() const;
};

// Writes report.json, metrics.csv, history.csv, timings.json and every array
// (repo format + PGM previews) under `dir`.
void write_report(const ExperimentReport &report, const std::filesystem::path &dir);

ExperimentReport run_experiment(const ExperimentConfig &cfg);

std::vector<ComplexImage> make_pilot_frames(const ExperimentConfig &cfg);
ExperimentReport run_pilot_transfer(const ExperimentConfig &cfg,
                                    const std::vector<ComplexImage> &frames);

} // namespace adasamp
