#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "adasamp/forward_model.hpp"
#include "adasamp/image.hpp"

namespace adasamp::io {

namespace fs = std::filesystem;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Arrays are stored as `<stem>.bin` (little-endian float32, complex data
// interleaved re/im, row-major) with a `<stem>.json` sidecar:
//   { "shape": [r, c], "dtype": "c64" | "f32", "order": "row-major", ... }
// `extra` fields are merged into the sidecar.
void write_array(const fs::path &stem, const ComplexImage &x,
                 const nlohmann::json &extra = nlohmann::json::object());
void write_array(const fs::path &stem, const RealGrid &g,
                 const nlohmann::json &extra = nlohmann::json::object());

ComplexImage read_complex_array(const fs::path &stem);
RealGrid read_real_array(const fs::path &stem);
nlohmann::json read_sidecar(const fs::path &stem);

// 0/1 grid plus acquisition order and mode in the sidecar.
void write_mask(const fs::path &stem, const SamplingMask &mask);
SamplingMask read_mask(const fs::path &stem);

// 8-bit binary PGM (P5), max-normalized. An all-zero grid writes zeros.
void write_pgm(const fs::path &path, const RealGrid &g);

// Rounds through float32, i.e. the precision arrays are stored at.
ComplexImage quantize_f32(const ComplexImage &x);

} // namespace adasamp::io
