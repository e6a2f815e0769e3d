// nacorr/common.hpp
//
// Error types, checked assertions and the string/hash utilities shared by
// every module.

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

#ifndef NACORR_COMMON_HPP_
#define NACORR_COMMON_HPP_

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nacorr {

// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad inputs: configs, files, shapes, preconditions.  CLI exit code 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Bad command line.  CLI exit code 1.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

namespace detail {

inline void cat_into(std::ostringstream&) {}

template <typename T, typename... Rest>
void cat_into(std::ostringstream& os, T&& v, Rest&&... rest) {
  os << v;
  cat_into(os, std::forward<Rest>(rest)...);
}

template <typename... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  cat_into(os, std::forward<Args>(args)...);
  return os.str();
}

}  // namespace detail

// Validation check with a lazily built message.
#define NACORR_CHECK(cond, ...)                                          \
  do {                                                                   \
    if (!(cond))                                                         \
      throw ::nacorr::ValidationError(::nacorr::detail::cat(__VA_ARGS__)); \
  } while (0)

// FNV-1a, used for id hashing, split assignment and artifact hashes.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64 finalizer; decorrelates derived seeds.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

// Seed for a named substream, e.g. derive_seed(seed, "acoustic").
inline uint64_t derive_seed(uint64_t seed, std::string_view tag) {
  return hash_mix(seed, fnv1a64(tag));
}

inline std::string hash_hex(uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << h;
  return os.str();
}

}  // namespace nacorr

#endif  // NACORR_COMMON_HPP_
