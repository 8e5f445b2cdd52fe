#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "adasamp/array_io.hpp"
#include "test_util.hpp"

using namespace adasamp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char *name) {
  fs::path d = fs::temp_directory_path() / "adasamp_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<unsigned char> slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("complex arrays: byte layout and sidecar") {
  const auto dir = scratch_dir("layout");
  ComplexImage x(Shape{1, 2});
  x[0] = {1.0, -2.0};
  x[1] = {0.5, 3.0};
  io::write_array(dir / "x", x);

  const auto bytes = slurp(dir / "x.bin");
  REQUIRE(bytes.size() == 16);
  float f[4];
  std::memcpy(f, bytes.data(), 16);
  CHECK(f[0] == 1.0f);
  CHECK(f[1] == -2.0f);
  CHECK(f[2] == 0.5f);
  CHECK(f[3] == 3.0f);
  // 1.0f little-endian
  CHECK(bytes[0] == 0x00);
  CHECK(bytes[3] == 0x3f);

  const auto j = io::read_sidecar(dir / "x");
  CHECK(j["shape"] == nlohmann::json::array({1, 2}));
  CHECK(j["dtype"] == "c64");
  CHECK(j["order"] == "row-major");
}

TEST_CASE("array round trip equals float32 quantization") {
  const auto dir = scratch_dir("roundtrip");
  std::mt19937_64 rng(1);
  for (Shape s : {Shape{17, 1}, Shape{9, 13}}) {
    const ComplexImage x = testutil::random_image(s, rng);
    io::write_array(dir / "c", x);
    CHECK(io::read_complex_array(dir / "c") == io::quantize_f32(x));

    RealGrid g(s);
    for (std::size_t i = 0; i < s.size(); ++i) g[i] = std::abs(x[i]);
    io::write_array(dir / "r", g);
    const RealGrid back = io::read_real_array(dir / "r");
    for (std::size_t i = 0; i < s.size(); ++i)
      CHECK(back[i] == static_cast<double>(static_cast<float>(g[i])));
    CHECK_THROWS_AS(io::read_complex_array(dir / "r"), io::IoError);
  }
}

TEST_CASE("mask serialization keeps acquisition order") {
  const auto dir = scratch_dir("mask");
  SamplingMask m(Shape{4, 4}, SamplingMode::line);
  m.add(m.column_indices(2));
  m.add(m.column_indices(0));
  io::write_mask(dir / "m", m);
  const auto j = io::read_sidecar(dir / "m");
  CHECK(j["mode"] == "line");
  CHECK(j["count"] == 8);
  const SamplingMask back = io::read_mask(dir / "m");
  CHECK(back.acquired() == m.acquired());
  CHECK(back.mode() == SamplingMode::line);
}

TEST_CASE("pgm is max-normalized P5") {
  const auto dir = scratch_dir("pgm");
  RealGrid g(Shape{2, 3});
  g[1] = 2.0;
  g[4] = 1.0;
  io::write_pgm(dir / "g.pgm", g);
  const auto bytes = slurp(dir / "g.pgm");
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) == header);
  CHECK(bytes[header.size() + 1] == 255);
  CHECK(bytes[header.size() + 4] == 128);
  CHECK(bytes[header.size() + 0] == 0);
}
