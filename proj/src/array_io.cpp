#include "adasamp/array_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace adasamp::io {
namespace {

fs::path with_ext(const fs::path &stem, const char *ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

void write_floats(const fs::path &path, const std::vector<float> &v) {
  static_assert(std::endian::native == std::endian::little,
                "array writer assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char *>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<float> read_floats(const fs::path &path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<float> v(count);
  in.read(reinterpret_cast<char *>(v.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(float)))
    throw IoError("short read: " + path.string());
  return v;
}

void write_sidecar(const fs::path &stem, const Shape &shape, const char *dtype,
                   const nlohmann::json &extra) {
  nlohmann::json j = {{"shape", {shape.rows, shape.cols}},
                      {"dtype", dtype},
                      {"order", "row-major"}};
  for (const auto &[k, v] : extra.items()) j[k] = v;
  std::ofstream out(with_ext(stem, ".json"));
  if (!out) throw IoError("cannot write sidecar for " + stem.string());
  out << j.dump(2) << '\n';
}

Shape sidecar_shape(const nlohmann::json &j, const char *dtype) {
  if (j.at("dtype") != dtype)
    throw IoError(std::string("expected dtype ") + dtype);
  if (j.at("order") != "row-major") throw IoError("expected row-major order");
  return {j.at("shape").at(0).get<std::size_t>(),
          j.at("shape").at(1).get<std::size_t>()};
}

} // namespace

nlohmann::json read_sidecar(const fs::path &stem) {
  std::ifstream in(with_ext(stem, ".json"));
  if (!in) throw IoError("missing sidecar for " + stem.string());
  return nlohmann::json::parse(in);
}

void write_array(const fs::path &stem, const ComplexImage &x,
                 const nlohmann::json &extra) {
  std::vector<float> buf(2 * x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    buf[2 * i] = static_cast<float>(x[i].real());
    buf[2 * i + 1] = static_cast<float>(x[i].imag());
  }
  write_floats(with_ext(stem, ".bin"), buf);
  write_sidecar(stem, x.shape(), "c64", extra);
}

void write_array(const fs::path &stem, const RealGrid &g,
                 const nlohmann::json &extra) {
  std::vector<float> buf(g.values.begin(), g.values.end());
  write_floats(with_ext(stem, ".bin"), buf);
  write_sidecar(stem, g.shape, "f32", extra);
}

ComplexImage read_complex_array(const fs::path &stem) {
  const Shape shape = sidecar_shape(read_sidecar(stem), "c64");
  const auto buf = read_floats(with_ext(stem, ".bin"), 2 * shape.size());
  ComplexImage x(shape);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = {buf[2 * i], buf[2 * i + 1]};
  return x;
}

RealGrid read_real_array(const fs::path &stem) {
  const Shape shape = sidecar_shape(read_sidecar(stem), "f32");
  const auto buf = read_floats(with_ext(stem, ".bin"), shape.size());
  RealGrid g(shape);
  std::copy(buf.begin(), buf.end(), g.values.begin());
  return g;
}

void write_mask(const fs::path &stem, const SamplingMask &mask) {
  RealGrid g(mask.shape());
  for (std::size_t n : mask.acquired()) g[n] = 1.0;
  write_array(stem, g,
              {{"mode", std::string(to_string(mask.mode()))},
               {"count", mask.count()},
               {"acquisition_order", mask.acquired()}});
}

SamplingMask read_mask(const fs::path &stem) {
  const auto j = read_sidecar(stem);
  const Shape shape = sidecar_shape(j, "f32");
  SamplingMask mask(shape, parse_sampling_mode(j.value("mode", "pointwise")));
  const auto order = j.at("acquisition_order").get<std::vector<std::size_t>>();
  mask.add(order);
  const RealGrid g = read_real_array(stem);
  for (std::size_t i = 0; i < shape.size(); ++i)
    if ((g[i] != 0.0) != mask.contains(i))
      throw IoError("mask grid disagrees with acquisition order at " +
                    std::to_string(i));
  return mask;
}

void write_pgm(const fs::path &path, const RealGrid &g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out << "P5\n" << g.shape.cols << ' ' << g.shape.rows << "\n255\n";
  const double peak = g.values.empty()
                          ? 0.0
                          : *std::max_element(g.values.begin(), g.values.end());
  std::vector<unsigned char> px(g.values.size(), 0);
  if (peak > 0.0)
    for (std::size_t i = 0; i < px.size(); ++i)
      px[i] = static_cast<unsigned char>(
          std::lround(std::clamp(g[i] / peak, 0.0, 1.0) * 255.0));
  out.write(reinterpret_cast<const char *>(px.data()),
            static_cast<std::streamsize>(px.size()));
}

ComplexImage quantize_f32(const ComplexImage &x) {
  ComplexImage q(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    q[i] = {static_cast<double>(static_cast<float>(x[i].real())),
            static_cast<double>(static_cast<float>(x[i].imag()))};
  return q;
}

} // namespace adasamp::io
