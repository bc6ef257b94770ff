#include <doctest.h>

#include <cmath>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/features.hpp"

using namespace sqlfunc;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.d_h = 8;
  cfg.d_e = 4;
  cfg.K = 4;
  cfg.T = 2;
  cfg.content_channels = {4, 4, 6, 6};
  cfg.seed = 99;
  return cfg;
}

double l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("ascii one-hot layout") {
  Mat m = ascii_onehot("a");
  CHECK(m.rows == 64);
  CHECK(m.cols == 128);
  CHECK(m.at(0, 'a') == 1.0);
  double total = 0;
  for (double v : m.d) total += v;
  CHECK(total == 1.0);  // one populated row

  Mat empty = ascii_onehot("");
  for (double v : empty.d) CHECK(v == 0.0);

  std::string longtext(70, 'x');
  Mat trunc = ascii_onehot(longtext);
  double sum = 0;
  for (double v : trunc.d) sum += v;
  CHECK(sum == 64.0);  // only the first 64 characters fit

  // each populated row sums to one
  Mat word = ascii_onehot("select");
  for (int i = 0; i < 6; ++i) {
    double row = 0;
    for (int j = 0; j < 128; ++j) row += word.at(i, j);
    CHECK(row == 1.0);
  }

  // non-ASCII bytes map to '?'
  Mat odd = ascii_onehot("\xc3\xa9");
  CHECK(odd.at(0, '?') == 1.0);
  CHECK(odd.at(1, '?') == 1.0);
}

TEST_CASE("content encoder determinism and zero head") {
  GmnParams params = GmnParams::init(tiny_config());
  std::vector<double> a = content_encode(ascii_onehot("kid"), params);
  std::vector<double> b = content_encode(ascii_onehot("kid"), params);
  CHECK(a == b);  // bitwise repeatable

  // similar-meaning but distinct tokens land on distinct vectors
  std::vector<double> c = content_encode(ascii_onehot("child"), params);
  CHECK(l2(a, c) > 0.0);

  // a zeroed output head collapses every encoding to zero
  GmnParams zeroed = params;
  for (double& v : zeroed.at("content_net.head.weight").d) v = 0.0;
  for (double& v : zeroed.at("content_net.head.bias").d) v = 0.0;
  for (double v : content_encode(ascii_onehot(""), zeroed)) CHECK(v == 0.0);
  for (double v : content_encode(ascii_onehot("anything"), zeroed))
    CHECK(v == 0.0);
}

TEST_CASE("encoder output stays finite over a vocabulary sweep") {
  GmnParams params = GmnParams::init(tiny_config());
  const char* vocab[] = {"student", "student.age", "pets", "has_pet.stuid",
                         "'a longer literal with spaces'", "1234567890",
                         "x", "*", "DESC"};
  for (const char* w : vocab) {
    for (double v : content_encode(ascii_onehot(w), params))
      CHECK(std::isfinite(v));
  }
}

TEST_CASE("computing embeddings are table rows") {
  GmnParams params = GmnParams::init(tiny_config());
  std::vector<double> row0 = computing_embed(0, params);
  const Mat& table = params.at("opcode_table");
  for (int j = 0; j < table.cols; ++j) CHECK(row0[j] == table.at(0, j));
  CHECK(computing_embed(5, params) == computing_embed(5, params));
  CHECK_THROWS_AS(computing_embed(kOpcodeSlots, params), OpcodeOutOfRange);
  CHECK_THROWS_AS(computing_embed(-1, params), OpcodeOutOfRange);
}

TEST_CASE("edge embeddings: one row per kind, rows distinct at init") {
  GmnParams params = GmnParams::init(tiny_config());
  std::vector<double> syntax = edge_embed(EdgeKind::Syntax, params);
  std::vector<double> logic = edge_embed(EdgeKind::LogicFlow, params);
  std::vector<double> data = edge_embed(EdgeKind::DataFlow, params);
  const Mat& table = params.at("edge_table");
  for (int j = 0; j < table.cols; ++j) {
    CHECK(syntax[j] == table.at(0, j));
    CHECK(logic[j] == table.at(1, j));
    CHECK(data[j] == table.at(2, j));
  }
  CHECK(l2(syntax, logic) > 0.0);
  CHECK(l2(logic, data) > 0.0);
}
