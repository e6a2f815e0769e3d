// nacorr/config.hpp
//
// Experiment configuration: flat key=value text, one section prefix per
// module, diff-friendly.  The canonical serialization defines the config
// hash; the (data, channel) subset defines the dataset hash every artifact
// chains from.

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

#ifndef NACORR_CONFIG_HPP_
#define NACORR_CONFIG_HPP_

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "nacorr/channel.hpp"
#include "nacorr/common.hpp"

namespace nacorr {

// Ablation ladder: which references the corrector sees and how many
// candidates are fused.
enum class Mode { kM1, kM2, kM3, kM4 };

inline Mode parse_mode(const std::string& s) {
  if (s == "m1") return Mode::kM1;
  if (s == "m2") return Mode::kM2;
  if (s == "m3") return Mode::kM3;
  if (s == "m4") return Mode::kM4;
  throw ValidationError(detail::cat("bad mode \"", s, "\", expected m1|m2|m3|m4"));
}

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kM1: return "m1";
    case Mode::kM2: return "m2";
    case Mode::kM3: return "m3";
    case Mode::kM4: return "m4";
  }
  return "m4";
}

inline bool mode_uses_acoustic(Mode m) { return m != Mode::kM1; }
inline bool mode_uses_confidence(Mode m) { return m != Mode::kM2; }
inline int mode_candidates(Mode m, int n_best) { return m == Mode::kM4 ? n_best : 1; }

struct ExperimentConfig {
  // data.*
  int num_utterances = 2500;
  int ref_len_min = 6;
  int ref_len_max = 14;
  int vocab_size = 50;  // non-blank symbols

  // channel.*
  ChannelConfig channel;

  // model.*
  int model_dim = 64;
  int model_heads = 4;
  int model_layers = 3;

  // train.*
  double lr = 1e-3;
  int batch_size = 16;
  int cem_epochs = 12;
  int corrector_epochs = 12;
  uint64_t train_seed = 1;
  double dropout = 0.0;

  // eval.*
  int latency_warmup = 10;
  bool measure_latency = false;

  // run.*
  Mode mode = Mode::kM4;

  void validate() const {
    NACORR_CHECK(num_utterances >= 1, "config: data.num_utterances must be >= 1");
    NACORR_CHECK(ref_len_min >= 1 && ref_len_min <= ref_len_max,
                 "config: bad data.ref_len range");
    NACORR_CHECK(vocab_size >= 2, "config: data.vocab_size must be >= 2");
    channel.validate();
    NACORR_CHECK(model_dim >= 1 && model_heads >= 1 && model_dim % model_heads == 0,
                 "config: model.dim must be divisible by model.heads");
    NACORR_CHECK(model_layers >= 1, "config: model.layers must be >= 1");
    NACORR_CHECK(lr > 0, "config: train.lr must be positive");
    NACORR_CHECK(batch_size >= 1, "config: train.batch_size must be >= 1");
    NACORR_CHECK(cem_epochs >= 1 && corrector_epochs >= 1, "config: epochs must be >= 1");
    NACORR_CHECK(dropout >= 0.0 && dropout < 1.0, "config: train.dropout must be in [0,1)");
    NACORR_CHECK(latency_warmup >= 0, "config: eval.latency_warmup must be >= 0");
  }

  // Canonical serialization: fixed key order, full precision.
  std::string serialize() const {
    std::ostringstream os;
    os << "data.num_utterances=" << num_utterances << "\n";
    os << "data.ref_len_min=" << ref_len_min << "\n";
    os << "data.ref_len_max=" << ref_len_max << "\n";
    os << "data.vocab_size=" << vocab_size << "\n";
    os << "channel.sub_rate=" << fmt(channel.sub_rate) << "\n";
    os << "channel.del_rate=" << fmt(channel.del_rate) << "\n";
    os << "channel.ins_rate=" << fmt(channel.ins_rate) << "\n";
    os << "channel.confusion_temperature=" << fmt(channel.confusion_temperature) << "\n";
    os << "channel.n_best=" << channel.n_best << "\n";
    os << "channel.frames_per_token=" << channel.frames_per_token << "\n";
    os << "channel.acoustic_dim=" << channel.acoustic_dim << "\n";
    os << "channel.acoustic_noise_sigma=" << fmt(channel.acoustic_noise_sigma) << "\n";
    os << "channel.text_feature_noise_sigma=" << fmt(channel.text_feature_noise_sigma) << "\n";
    os << "channel.master_seed=" << channel.master_seed << "\n";
    os << "model.dim=" << model_dim << "\n";
    os << "model.heads=" << model_heads << "\n";
    os << "model.layers=" << model_layers << "\n";
    os << "train.lr=" << fmt(lr) << "\n";
    os << "train.batch_size=" << batch_size << "\n";
    os << "train.cem_epochs=" << cem_epochs << "\n";
    os << "train.corrector_epochs=" << corrector_epochs << "\n";
    os << "train.seed=" << train_seed << "\n";
    os << "train.dropout=" << fmt(dropout) << "\n";
    os << "eval.latency_warmup=" << latency_warmup << "\n";
    os << "eval.measure_latency=" << (measure_latency ? "true" : "false") << "\n";
    os << "run.mode=" << mode_name(mode) << "\n";
    return os.str();
  }

  // Hash of the full effective config (after any CLI overrides).
  uint64_t config_hash() const { return fnv1a64(serialize()); }

  // Hash of the sections a dataset depends on.
  uint64_t dataset_config_hash() const {
    std::string all = serialize();
    std::ostringstream os;
    std::istringstream in(all);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("data.", 0) == 0 || line.rfind("channel.", 0) == 0) os << line << "\n";
    }
    return fnv1a64(os.str());
  }

  void set(const std::string& key, const std::string& value) {
    try {
      if (key == "data.num_utterances") num_utterances = std::stoi(value);
      else if (key == "data.ref_len_min") ref_len_min = std::stoi(value);
      else if (key == "data.ref_len_max") ref_len_max = std::stoi(value);
      else if (key == "data.vocab_size") vocab_size = std::stoi(value);
      else if (key == "channel.sub_rate") channel.sub_rate = std::stod(value);
      else if (key == "channel.del_rate") channel.del_rate = std::stod(value);
      else if (key == "channel.ins_rate") channel.ins_rate = std::stod(value);
      else if (key == "channel.confusion_temperature")
        channel.confusion_temperature = std::stod(value);
      else if (key == "channel.n_best") channel.n_best = std::stoi(value);
      else if (key == "channel.frames_per_token") channel.frames_per_token = std::stoi(value);
      else if (key == "channel.acoustic_dim") channel.acoustic_dim = std::stoi(value);
      else if (key == "channel.acoustic_noise_sigma")
        channel.acoustic_noise_sigma = std::stod(value);
      else if (key == "channel.text_feature_noise_sigma")
        channel.text_feature_noise_sigma = std::stod(value);
      else if (key == "channel.master_seed") channel.master_seed = std::stoull(value);
      else if (key == "model.dim") model_dim = std::stoi(value);
      else if (key == "model.heads") model_heads = std::stoi(value);
      else if (key == "model.layers") model_layers = std::stoi(value);
      else if (key == "train.lr") lr = std::stod(value);
      else if (key == "train.batch_size") batch_size = std::stoi(value);
      else if (key == "train.cem_epochs") cem_epochs = std::stoi(value);
      else if (key == "train.corrector_epochs") corrector_epochs = std::stoi(value);
      else if (key == "train.seed") train_seed = std::stoull(value);
      else if (key == "train.dropout") dropout = std::stod(value);
      else if (key == "eval.latency_warmup") latency_warmup = std::stoi(value);
      else if (key == "eval.measure_latency") measure_latency = (value == "true" || value == "1");
      else if (key == "run.mode") mode = parse_mode(value);
      else throw ValidationError(detail::cat("config: unknown key \"", key, "\""));
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError(detail::cat("config: bad value for ", key, ": \"", value, "\""));
    }
  }

  static ExperimentConfig parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      size_t first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (line[first] == '#') continue;
      size_t eq = line.find('=');
      NACORR_CHECK(eq != std::string::npos, "config line ", lineno, ": expected key=value, got \"",
                   line, "\"");
      std::string key = line.substr(first, eq - first);
      std::string value = line.substr(eq + 1);
      while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
      while (!value.empty() && (value.back() == ' ' || value.back() == '\t' || value.back() == '\r'))
        value.pop_back();
      size_t vstart = value.find_first_not_of(" \t");
      value = vstart == std::string::npos ? "" : value.substr(vstart);
      cfg.set(key, value);
    }
    return cfg;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream f(path);
    NACORR_CHECK(f.good(), "cannot read config file ", path);
    std::ostringstream buf;
    buf << f.rdbuf();
    ExperimentConfig cfg = parse(buf.str());
    cfg.validate();
    return cfg;
  }

 private:
  static std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }
};

}  // namespace nacorr

#endif  // NACORR_CONFIG_HPP_
