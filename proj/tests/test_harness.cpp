#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "adasamp/array_io.hpp"
#include "adasamp/harness.hpp"
#include "test_util.hpp"

using namespace adasamp;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.phantom = PhantomKind::smooth_bumps;
  c.shape = {16, 16};
  c.undersampling_ratio = 4.0; // 64 samples
  c.n_add = 3;
  c.policy = {4, SamplingMode::pointwise};
  c.n_steps = 20;
  c.n_samples = 3;
  c.seed = 7;
  return c;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string &name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

} // namespace

TEST_CASE("psnr") {
  std::mt19937_64 rng(3);
  const Shape s{4, 4};
  const auto ref = testutil::random_image(s, rng);
  CHECK(psnr(ref, ref) == kPsnrCap);

  SUBCASE("peak 1 and MSE 0.01 give 20 dB") {
    ComplexImage a(s), b(s);
    a[0] = 1.0;
    for (std::size_t i = 0; i < s.size(); ++i) b[i] = a[i] + (i % 2 ? 0.1 : -0.1);
    b[0] = 0.9;
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("loop oracle on magnitudes") {
    const Shape n16{16, 1};
    const auto a = testutil::random_image(n16, rng);
    const auto b = testutil::random_image(n16, rng);
    double peak = 0, mse = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      peak = std::max(peak, std::abs(a[i]));
      mse += std::pow(std::abs(a[i]) - std::abs(b[i]), 2) / 16.0;
    }
    CHECK(std::abs(psnr(a, b) - 10.0 * std::log10(peak * peak / mse)) < 1e-10);
  }
  SUBCASE("phase is ignored") {
    ComplexImage rot = ref;
    rot *= std::polar(1.0, 0.7);
    CHECK(psnr(ref, rot) > 140.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(psnr(ref, ComplexImage(Shape{2, 8})), DimensionError);
    CHECK_THROWS_AS(psnr(ComplexImage(s), ref), ArgumentError);
  }
}

TEST_CASE("reconstruct_final") {
  std::mt19937_64 rng(4);
  const Shape s{4, 4};
  PosteriorEnsemble e;
  CHECK_THROWS_AS(reconstruct_final(e), ArgumentError);
  const auto a = testutil::random_image(s, rng);
  e.images = {a};
  CHECK(reconstruct_final(e) == a);
  const auto b = testutil::random_image(s, rng);
  e.images = {a, b};
  const auto ab = reconstruct_final(e);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(ab[i] - (a[i] + b[i]) / 2.0) < 1e-15);

  e.images.clear();
  for (int i = 0; i < 8; ++i) e.images.push_back(testutil::random_image(s, rng));
  const auto m = reconstruct_final(e);
  for (std::size_t n = 0; n < s.size(); ++n) {
    cplx acc{0, 0};
    for (const auto &x : e.images) acc += x[n];
    CHECK(std::abs(m[n] - acc / 8.0) < 1e-12);
  }
}

TEST_CASE("config") {
  SUBCASE("budget arithmetic") {
    ExperimentConfig c; // 64x64 at 10x, 30 x 10 added
    CHECK(c.final_budget() == 410);
    CHECK(c.initial_budget() == 110);
    c.n_add.reset();
    CHECK(c.initial_budget() + c.resolved_n_add() * c.policy.batch_size <= 410);
    CHECK(c.initial_budget() >= 164);
    c.policy = {2, SamplingMode::line};
    c.n_add = 2;
    CHECK(c.grid_units() == 64);
    CHECK(c.final_budget() == 6);
    CHECK(c.initial_budget() == 2);
  }
  SUBCASE("JSON round trip") {
    ExperimentConfig c = small_config();
    c.mu = {ScheduleKind::geometric, 1e-3, 1e-5};
    c.init_noise_std = 0.02;
    c.baselines = {BaselineKind::variable_density};
    c.n_add.reset();
    const auto j = to_json(c);
    CHECK(to_json(config_from_json(j)) == j);
    CHECK_FALSE(j.contains("threads"));
  }
  SUBCASE("partial JSON keeps defaults") {
    const auto c = config_from_json(nlohmann::json::parse(
        R"({"phantom": {"rows": 32}, "sgld": {"mu": 0.002}, "seed": 5})"));
    CHECK(c.shape.rows == 32);
    CHECK(c.shape.cols == 64);
    CHECK(c.mu.kind == ScheduleKind::constant);
    CHECK(c.mu.end == 0.002);
    CHECK(c.seed == 5);
    CHECK(c.n_samples == ExperimentConfig{}.n_samples);
  }
  SUBCASE("validation happens before any compute") {
    ExperimentConfig c = small_config();
    c.n_add = 100;
    CHECK_THROWS_AS(run_experiment(c), ArgumentError);
    c = small_config();
    c.n_samples = 1;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = small_config();
    c.undersampling_ratio = 0.5;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = small_config();
    c.lambda = 0.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"baselines": ["radial"]})")),
                    ArgumentError);
  }
}

TEST_CASE("run_experiment at full budget hits the cap everywhere") {
  ExperimentConfig c = small_config();
  c.shape = {8, 8};
  c.undersampling_ratio = 1.0;
  c.n_add = 2;
  c.noise_sigma = 0.0;
  c.n_steps = 0;
  c.init = InitKind::adjoint;
  c.baselines = {BaselineKind::uniform_random, BaselineKind::poisson_disk,
                 BaselineKind::low_frequency};
  const auto r = run_experiment(c);
  REQUIRE(r.methods.size() == 4);
  for (const auto &m : r.methods) {
    CHECK(m.mask.count() == 64);
    CHECK(m.psnr_db == kPsnrCap);
  }
}

TEST_CASE("run_experiment outputs") {
  ExperimentConfig c = small_config();
  const auto dir_a = fresh_dir("adasamp_harness_a");
  const auto dir_b = fresh_dir("adasamp_harness_b");
  c.output_dir = dir_a;
  const auto r = run_experiment(c);
  c.output_dir = dir_b;
  c.threads = 3;
  run_experiment(c);

  SUBCASE("budget fairness") {
    REQUIRE(r.methods.size() == 3);
    for (const auto &m : r.methods) CHECK(m.mask.count() == c.final_budget());
    CHECK(r.history.size() == 3);
    CHECK(r.method("adaptive").mask.count() == 64);
  }
  SUBCASE("byte-identical artifacts, independent of thread count") {
    for (const auto &e : fs::directory_iterator(dir_a)) {
      const auto name = e.path().filename();
      if (name == "timings.json") continue;
      INFO(name.string());
      CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }
  }
  SUBCASE("reported PSNR is recomputable from stored arrays") {
    const auto j = nlohmann::json::parse(slurp(dir_a / "report.json"));
    const auto ref = io::read_complex_array(dir_a / j["references"][0].get<std::string>());
    for (const auto &m : j["methods"]) {
      const auto rec = io::read_complex_array(dir_a / m["reconstruction"].get<std::string>());
      CHECK(psnr(ref, rec) == m["psnr_db"].get<double>());
      const auto mask = io::read_mask(dir_a / m["mask"].get<std::string>());
      CHECK(mask.count() == m["sample_count"].get<std::size_t>());
    }
    CHECK(fs::exists(dir_a / "metrics.csv"));
    CHECK(fs::exists(dir_a / "recon_adaptive_f1.pgm"));
    CHECK(fs::exists(dir_a / "variance_adaptive.bin"));
    std::ifstream hist(dir_a / "history.csv");
    std::string line;
    std::size_t rows = 0;
    std::getline(hist, line);
    CHECK(line == "iteration,selected_index,variance_at_selection");
    while (std::getline(hist, line)) ++rows;
    CHECK(rows == 3 * 4);
  }
  SUBCASE("a different seed changes the result") {
    ExperimentConfig d = small_config();
    d.seed = 8;
    CHECK(run_experiment(d).to_json() != r.to_json());
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("pilot transfer") {
  ExperimentConfig c = small_config();
  c.baselines = {BaselineKind::uniform_random};

  SUBCASE("identical frames reconstruct identically") {
    const auto f = make_phantom(c.phantom, c.shape);
    const auto r = run_pilot_transfer(c, {f, f, f});
    for (const std::string arm : {"adaptive_frozen", "uniform_random"}) {
      CHECK(r.method(arm, 2).psnr_db == r.method(arm, 1).psnr_db);
      CHECK(r.method(arm, 3).psnr_db == r.method(arm, 1).psnr_db);
    }
    CHECK(r.method("adaptive_frozen", 2).mask.acquired() ==
          r.method("adaptive_online", 1).mask.acquired());
  }
  SUBCASE("bumped frames") {
    c.pilot_frames = 2;
    const auto frames = make_pilot_frames(c);
    REQUIRE(frames.size() == 2);
    CHECK(frames[0] != frames[1]);
    CHECK((frames[1] - frames[0]).max_abs() == doctest::Approx(c.bump_amplitude).epsilon(0.2));
    const auto r = run_pilot_transfer(c, frames);
    CHECK(std::isfinite(r.method("adaptive_frozen", 2).psnr_db));
    CHECK(r.method("adaptive_frozen", 2).mask.count() == r.method("uniform_random", 2).mask.count());
  }
  SUBCASE("pilot only") {
    const auto r = run_pilot_transfer(c, {make_phantom(c.phantom, c.shape)});
    CHECK(r.methods.size() == 3); // online + frozen + uniform_random, all frame 1
    CHECK_THROWS_AS(r.method("adaptive_frozen", 2), ArgumentError);
  }
  SUBCASE("frame shape mismatch") {
    CHECK_THROWS_AS(run_pilot_transfer(c, {make_phantom(c.phantom, c.shape),
                                           ComplexImage(Shape{8, 8})}),
                    DimensionError);
  }
}
