// nacorr/checkpoint.hpp
//
// Binary parameter checkpoints, little-endian: magic, version, provenance
// hashes, parameter count, then per parameter name length, name, rows, cols,
// row-major doubles.  Files are written to a temp path and renamed so an
// interrupted run never leaves a torn checkpoint.

// Copyright 2026  The nacorr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NACORR_CHECKPOINT_HPP_
#define NACORR_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "nacorr/common.hpp"
#include "nacorr/nn.hpp"

namespace nacorr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

constexpr char kCheckpointMagic[8] = {'N', 'A', 'C', 'O', 'R', 'R', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  uint64_t config_hash = 0;    // effective config of the producing run
  uint64_t dataset_hash = 0;   // content hash of the dataset trained on
  uint64_t upstream_hash = 0;  // e.g. CEM checkpoint hash inside corrector checkpoints
};

namespace detail {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                            const ParamList& params) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc | std::ios::binary);
    NACORR_CHECK(f.good(), "cannot write checkpoint ", tmp);
    f.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::write_pod(f, kCheckpointVersion);
    detail::write_pod(f, header.config_hash);
    detail::write_pod(f, header.dataset_hash);
    detail::write_pod(f, header.upstream_hash);
    detail::write_pod(f, static_cast<uint64_t>(params.size()));
    for (const Parameter* p : params) {
      detail::write_pod(f, static_cast<uint32_t>(p->name.size()));
      f.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
      detail::write_pod(f, static_cast<uint64_t>(p->value.rows()));
      detail::write_pod(f, static_cast<uint64_t>(p->value.cols()));
      f.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    }
    NACORR_CHECK(f.good(), "write failure on checkpoint ", tmp);
  }
  NACORR_CHECK(std::rename(tmp.c_str(), path.c_str()) == 0, "cannot rename ", tmp, " to ", path);
}

// Loads values into an already-constructed parameter list; names and shapes
// must match exactly.  Returns the header.
inline CheckpointHeader load_checkpoint(const std::string& path, const ParamList& params) {
  std::ifstream f(path, std::ios::binary);
  NACORR_CHECK(f.good(), "cannot read checkpoint ", path);
  char magic[8];
  f.read(magic, sizeof(magic));
  NACORR_CHECK(f.good() && std::memcmp(magic, kCheckpointMagic, sizeof(magic)) == 0,
               "file ", path, " is not a nacorr checkpoint");
  uint32_t version = 0;
  detail::read_pod(f, version);
  NACORR_CHECK(version == kCheckpointVersion, "checkpoint ", path, ": unsupported version ",
               version);
  CheckpointHeader header;
  detail::read_pod(f, header.config_hash);
  detail::read_pod(f, header.dataset_hash);
  detail::read_pod(f, header.upstream_hash);
  uint64_t count = 0;
  detail::read_pod(f, count);
  NACORR_CHECK(count == params.size(), "checkpoint ", path, ": has ", count, " parameters, model has ",
               params.size());
  for (Parameter* p : params) {
    uint32_t name_len = 0;
    detail::read_pod(f, name_len);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    NACORR_CHECK(name == p->name, "checkpoint ", path, ": expected parameter \"", p->name,
                 "\", found \"", name, "\"");
    uint64_t rows = 0, cols = 0;
    detail::read_pod(f, rows);
    detail::read_pod(f, cols);
    NACORR_CHECK(rows == static_cast<uint64_t>(p->value.rows()) &&
                     cols == static_cast<uint64_t>(p->value.cols()),
                 "checkpoint ", path, ": parameter \"", name, "\" has shape ", rows, "x", cols,
                 ", model expects ", p->value.shape_str());
    f.read(reinterpret_cast<char*>(p->value.data()),
           static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    NACORR_CHECK(f.good(), "checkpoint ", path, ": truncated while reading \"", name, "\"");
    NACORR_CHECK(p->value.all_finite(), "checkpoint ", path, ": non-finite values in \"", name,
                 "\"");
  }
  return header;
}

// Content hash of a checkpoint file, used to chain artifacts together.
inline uint64_t file_content_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  NACORR_CHECK(f.good(), "cannot read ", path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return fnv1a64(buf.str());
}

// Stable checksum over live parameter values (freeze-contract checks).
inline uint64_t params_checksum(const ParamList& params) {
  uint64_t h = fnv1a64("params");
  for (const Parameter* p : params) {
    h = hash_mix(h, fnv1a64(p->name));
    const auto* bytes = reinterpret_cast<const unsigned char*>(p->value.data());
    std::string_view sv(reinterpret_cast<const char*>(bytes), p->value.size() * sizeof(double));
    h = hash_mix(h, fnv1a64(sv));
  }
  return h;
}

}  // namespace nacorr

#endif  // NACORR_CHECKPOINT_HPP_
