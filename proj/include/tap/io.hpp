#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tap/model.hpp"
#include "tap/tensor.hpp"
#include "tap/trainer.hpp"

namespace tap {

static_assert(std::endian::native == std::endian::little,
              "FT3D I/O assumes a little-endian host");

// FT3D: magic "FT3D", u32 version = 1, three u64 dims, then I1*I2*I3
// little-endian doubles, row-major with the mode-3 index fastest.
inline void write_ft3d(const std::string& path, const Tensor3& t) {
  std::ofstream f(path, std::ios::binary);
  detail::require(f.good(), "write_ft3d: cannot open " + path);
  f.write("FT3D", 4);
  const std::uint32_t version = 1;
  f.write(reinterpret_cast<const char*>(&version), 4);
  for (int l = 0; l < 3; ++l) {
    const std::uint64_t d = static_cast<std::uint64_t>(t.dims()[l]);
    f.write(reinterpret_cast<const char*>(&d), 8);
  }
  f.write(reinterpret_cast<const char*>(t.data().data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  detail::require(f.good(), "write_ft3d: write failed for " + path);
}

inline Tensor3 read_ft3d(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  detail::require(f.good(), "read_ft3d: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  detail::require(f.good() && std::memcmp(magic, "FT3D", 4) == 0,
                  "read_ft3d: bad magic in " + path);
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  detail::require(version == 1, "read_ft3d: unsupported version");
  std::uint64_t d[3];
  f.read(reinterpret_cast<char*>(d), 24);
  detail::require(f.good() && d[0] > 0 && d[1] > 0 && d[2] > 0,
                  "read_ft3d: bad dims");
  Tensor3 t(static_cast<int>(d[0]), static_cast<int>(d[1]),
            static_cast<int>(d[2]));
  f.read(reinterpret_cast<char*>(t.data().data()),
         static_cast<std::streamsize>(t.size() * sizeof(double)));
  detail::require(f.good(), "read_ft3d: truncated payload in " + path);
  return t;
}

inline void write_trace_csv(const std::string& path, const TrainTrace& trace) {
  std::ofstream f(path);
  detail::require(f.good(), "write_trace_csv: cannot open " + path);
  f << "epoch,loss,nonzero_fraction,seconds\n";
  f.precision(17);
  for (std::size_t e = 0; e < trace.loss.size(); ++e) {
    f << (e + 1) << ',' << trace.loss[e] << ','
      << trace.core_nonzero_fraction[e] << ',' << trace.seconds[e] << '\n';
  }
}

// Model checkpoint: magic "TAPM", u32 version, u64 JSON header length, the
// JSON header (config, dims, seed, normalization), then each parameter
// matrix as raw little-endian doubles in declared order (per head W_Q then
// W_K, then V1, V2, V3).
inline void write_checkpoint(const std::string& path, const ModelParams& params,
                             const std::string& header_json) {
  std::ofstream f(path, std::ios::binary);
  detail::require(f.good(), "write_checkpoint: cannot open " + path);
  f.write("TAPM", 4);
  const std::uint32_t version = 1;
  f.write(reinterpret_cast<const char*>(&version), 4);
  const std::uint64_t len = header_json.size();
  f.write(reinterpret_cast<const char*>(&len), 8);
  f.write(header_json.data(), static_cast<std::streamsize>(len));
  auto dump = [&f](const Matrix& m) {
    f.write(reinterpret_cast<const char*>(m.data().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
  };
  for (const auto& h : params.heads) {
    dump(h.w_query);
    dump(h.w_key);
  }
  dump(params.v1);
  dump(params.v2);
  dump(params.v3);
  detail::require(f.good(), "write_checkpoint: write failed");
}

// Reads the raw parameter payload back into params (shapes must already
// match the checkpoint's config); returns the JSON header.
inline std::string read_checkpoint(const std::string& path, ModelParams& params) {
  std::ifstream f(path, std::ios::binary);
  detail::require(f.good(), "read_checkpoint: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  detail::require(f.good() && std::memcmp(magic, "TAPM", 4) == 0,
                  "read_checkpoint: bad magic");
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  detail::require(version == 1, "read_checkpoint: unsupported version");
  std::uint64_t len = 0;
  f.read(reinterpret_cast<char*>(&len), 8);
  std::string header(len, '\0');
  f.read(header.data(), static_cast<std::streamsize>(len));
  auto load = [&f](Matrix& m) {
    f.read(reinterpret_cast<char*>(m.data().data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
  };
  for (auto& h : params.heads) {
    load(h.w_query);
    load(h.w_key);
  }
  load(params.v1);
  load(params.v2);
  load(params.v3);
  detail::require(f.good(), "read_checkpoint: truncated payload");
  return header;
}

}  // namespace tap
