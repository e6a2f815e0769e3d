// Tests for the rng, matrix, vocabulary, config and checkpoint layers.

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

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>

#include "nacorr/checkpoint.hpp"
#include "nacorr/config.hpp"
#include "nacorr/matrix.hpp"
#include "nacorr/rng.hpp"
#include "nacorr/vocab.hpp"

using namespace nacorr;

namespace {
std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("rng is deterministic and well ranged") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(a.next_u64() == b.next_u64());
  }
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    int k = r.uniform_int(5);
    REQUIRE(k >= 0);
    REQUIRE(k < 5);
  }
}

TEST_CASE("rng gaussian moments") {
  Rng r(11);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double g = r.gaussian();
    sum += g;
    sum2 += g * g;
  }
  REQUIRE(std::abs(sum / n) < 0.01);
  REQUIRE(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("matrix multiply against hand computation") {
  Matrix a(2, 3);
  Matrix b(3, 2);
  int v = 1;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) a.at(r, c) = v++;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) b.at(r, c) = v++;
  Matrix c = matmul(a, b);
  // a = [1 2 3; 4 5 6], b = [7 8; 9 10; 11 12]
  REQUIRE(c.at(0, 0) == 58.0);
  REQUIRE(c.at(0, 1) == 64.0);
  REQUIRE(c.at(1, 0) == 139.0);
  REQUIRE(c.at(1, 1) == 154.0);

  Matrix tn = matmul_tn(a, a);  // 3x3
  REQUIRE(tn.rows() == 3);
  REQUIRE(tn.at(0, 0) == 17.0);  // 1*1 + 4*4
  Matrix nt = matmul_nt(a, a);  // 2x2
  REQUIRE(nt.at(0, 0) == 14.0);  // 1+4+9
}

TEST_CASE("matrix shape mismatch names both shapes") {
  Matrix a(2, 3), b(2, 3);
  try {
    matmul(a, b);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("2x3") != std::string::npos);
  }
}

TEST_CASE("build_vocab prepends blank and rejects duplicates") {
  Vocabulary v = Vocabulary::build({"A", "B"});
  REQUIRE(v.size() == 3);
  REQUIRE(v.symbol(0) == "*");
  REQUIRE(v.symbol(1) == "A");
  REQUIRE(v.id_of("B") == 2);

  try {
    Vocabulary::build({"A", "A"});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(std::string(e.what()).find("\"A\"") != std::string::npos);
  }
  REQUIRE_THROWS_AS(Vocabulary::build({"*", "B"}), ValidationError);
  REQUIRE_THROWS_AS(Vocabulary::build({"a b", "c"}), ValidationError);
  REQUIRE_THROWS_AS(Vocabulary::build({"only"}), ValidationError);
}

TEST_CASE("encode and decode") {
  Vocabulary v = Vocabulary::build({"A", "B"});
  REQUIRE(v.encode({"A", "B"}) == TokenSeq{1, 2});
  REQUIRE(v.decode({0, 1}) == std::vector<std::string>{"*", "A"});
  try {
    v.encode({"C"});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(std::string(e.what()).find("\"C\"") != std::string::npos);
  }
}

TEST_CASE("synthetic vocabulary has dense unique ids") {
  Vocabulary v = Vocabulary::synthetic(50);
  REQUIRE(v.size() == 51);
  for (int32_t i = 0; i < v.size(); ++i) {
    REQUIRE(v.id_of(v.symbol(i)) == i);
  }
}

TEST_CASE("encode/decode round-trip property") {
  Vocabulary v = Vocabulary::synthetic(50);
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    int len = 1 + rng.uniform_int(20);
    TokenSeq seq(len);
    for (int i = 0; i < len; ++i) seq[i] = 1 + rng.uniform_int(v.size() - 1);
    REQUIRE(v.encode(v.decode(seq)) == seq);
  }
}

TEST_CASE("vocabulary file round-trip, line 0 is blank") {
  Vocabulary v = Vocabulary::synthetic(10);
  std::string path = temp_path("nacorr_vocab_test.txt");
  v.save(path);
  Vocabulary loaded = Vocabulary::load(path);
  REQUIRE(loaded.size() == v.size());
  REQUIRE(loaded.content_hash() == v.content_hash());

  // Tamper with line 0 -> rejected.
  {
    std::ofstream f(path, std::ios::trunc);
    f << "ba\n*\n";
  }
  REQUIRE_THROWS_AS(Vocabulary::load(path), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("config parse, serialize, hash") {
  ExperimentConfig cfg;
  std::string text = cfg.serialize();
  ExperimentConfig reparsed = ExperimentConfig::parse(text);
  REQUIRE(reparsed.serialize() == text);
  REQUIRE(reparsed.config_hash() == cfg.config_hash());

  ExperimentConfig other = ExperimentConfig::parse(text);
  other.set("train.seed", "999");
  REQUIRE(other.config_hash() != cfg.config_hash());
  // train.* does not influence the dataset hash.
  REQUIRE(other.dataset_config_hash() == cfg.dataset_config_hash());
  other.set("channel.sub_rate", "0.5");
  REQUIRE(other.dataset_config_hash() != cfg.dataset_config_hash());
}

TEST_CASE("config rejects unknown keys and bad values by name") {
  try {
    ExperimentConfig::parse("bogus.key=1\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(std::string(e.what()).find("bogus.key") != std::string::npos);
  }
  try {
    ExperimentConfig::parse("train.lr=banana\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(std::string(e.what()).find("train.lr") != std::string::npos);
  }
  ExperimentConfig c =
      ExperimentConfig::parse("channel.sub_rate=0.9\nchannel.del_rate=0.2\n");
  REQUIRE_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("config comments and whitespace") {
  ExperimentConfig cfg = ExperimentConfig::parse(
      "# a comment\n"
      "\n"
      "  train.batch_size = 7 \n"
      "run.mode=m2\n");
  REQUIRE(cfg.batch_size == 7);
  REQUIRE(cfg.mode == Mode::kM2);
}

TEST_CASE("checkpoint round-trip with provenance header") {
  Parameter p1("layer.w", 3, 4);
  Parameter p2("layer.b", 1, 4);
  Rng rng(5);
  p1.value.fill_gaussian(rng, 1.0);
  p2.value.fill_gaussian(rng, 1.0);
  ParamList ps{&p1, &p2};

  std::string path = temp_path("nacorr_ckpt_test.bin");
  CheckpointHeader h;
  h.config_hash = 0x1234;
  h.dataset_hash = 0x5678;
  h.upstream_hash = 0x9abc;
  save_checkpoint(path, h, ps);

  Parameter q1("layer.w", 3, 4), q2("layer.b", 1, 4);
  ParamList qs{&q1, &q2};
  CheckpointHeader loaded = load_checkpoint(path, qs);
  REQUIRE(loaded.config_hash == h.config_hash);
  REQUIRE(loaded.dataset_hash == h.dataset_hash);
  REQUIRE(loaded.upstream_hash == h.upstream_hash);
  REQUIRE(params_checksum(qs) == params_checksum(ps));

  // Wrong shape is refused.
  Parameter r1("layer.w", 3, 5), r2("layer.b", 1, 4);
  ParamList rs{&r1, &r2};
  REQUIRE_THROWS_AS(load_checkpoint(path, rs), ValidationError);

  // Wrong name is refused.
  Parameter s1("other.w", 3, 4), s2("layer.b", 1, 4);
  ParamList ss{&s1, &s2};
  REQUIRE_THROWS_AS(load_checkpoint(path, ss), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("frozen parameter rejects gradient writes") {
  Parameter p("w", 2, 2);
  p.frozen = true;
  REQUIRE_THROWS_AS(p.grad_buf(), ValidationError);
  REQUIRE_THROWS_AS(p.zero_grad(), ValidationError);
}
