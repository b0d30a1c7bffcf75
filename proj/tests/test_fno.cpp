#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nmg/adam.hpp"
#include "nmg/checkpoint.hpp"
#include "nmg/fno.hpp"
#include "nmg/vec.hpp"
#include "test_util.hpp"

using namespace nmg;
using nmg::test::random_vector;
using nmg::test::rel_error;

namespace {

FnoConfig tiny_1d() {
  FnoConfig cfg;
  cfg.rows = 16;
  cfg.channels = 4;
  cfg.modes = 4;
  cfg.layers = 2;
  cfg.kernel_size = 3;
  return cfg;
}

FnoConfig tiny_2d() {
  FnoConfig cfg;
  cfg.dims = 2;
  cfg.rows = 8;
  cfg.cols = 8;
  cfg.channels = 2;
  cfg.modes = 2;
  cfg.layers = 2;
  cfg.kernel_size = 3;
  return cfg;
}

// Randomizes every tensor, biases included, so all code paths are active.
FnoParams random_params(const FnoConfig& cfg, std::uint64_t seed) {
  auto p = fno_init(cfg, seed);
  std::uint64_t s = seed * 31;
  for (auto& t : p.tensors) {
    const auto r = random_vector(t.data.size(), ++s);
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = 0.3 * r[i];
  }
  return p;
}

// L = 0.5 ||N(x) - target||^2
double loss(const FnoParams& p, const FnoConfig& cfg, std::span<const double> x, std::span<const double> target) {
  const auto out = fno_forward(p, cfg, x);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += 0.5 * (out[i] - target[i]) * (out[i] - target[i]);
  return s;
}

void gradient_check(const FnoConfig& cfg, std::uint64_t seed) {
  auto p = random_params(cfg, seed);
  const auto x = random_vector(cfg.size(), seed + 1);
  const auto target = random_vector(cfg.size(), seed + 2);
  FnoCache cache;
  const auto out = fno_forward(p, cfg, x, &cache);
  std::vector<double> g_out(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) g_out[i] = out[i] - target[i];
  auto grads = fno_zero_like(p);
  const auto g_in = fno_backward(p, cfg, cache, g_out, grads);

  const double h = 1e-5;
  for (std::size_t k = 0; k < p.tensors.size(); ++k) {
    auto& t = p.tensors[k];
    std::vector<double> fd(t.data.size());
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      const double saved = t.data[i];
      t.data[i] = saved + h;
      const double lp = loss(p, cfg, x, target);
      t.data[i] = saved - h;
      const double lm = loss(p, cfg, x, target);
      t.data[i] = saved;
      fd[i] = (lp - lm) / (2.0 * h);
    }
    INFO("tensor " << t.name);
    CHECK(rel_error(grads.tensors[k].data, fd) <= 1e-4);
  }
  std::vector<double> fd_in(x.size());
  auto xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double lp = loss(p, cfg, xp, target);
    xp[i] = x[i] - h;
    const double lm = loss(p, cfg, xp, target);
    xp[i] = x[i];
    fd_in[i] = (lp - lm) / (2.0 * h);
  }
  CHECK(rel_error(g_in, fd_in) <= 1e-4);
}

}  // namespace

TEST_CASE("fno config validation") {
  auto cfg = tiny_1d();
  CHECK_NOTHROW(cfg.validate());
  cfg.modes = 9;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.modes = 4;
  cfg.kernel_size = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.kernel_size = 3;
  cfg.channels = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(tiny_2d().retained_bins() == 8);
}

TEST_CASE("fno forward") {
  SUBCASE("zero input with zero biases gives zero") {
    const auto cfg = tiny_1d();
    const auto p = fno_init(cfg, 3);
    for (double v : fno_forward(p, cfg, std::vector<double>(16, 0.0))) CHECK(v == 0.0);
  }
  SUBCASE("output shape matches input for the reference architectures") {
    struct Row {
      std::size_t n;
      int c, layers;
      std::size_t k;
      int ks;
    };
    // The 1D rows, plus the smallest 2D row.
    for (const Row r : {Row{64, 64, 4, 16, 5}, Row{128, 64, 4, 32, 5}, Row{256, 64, 5, 64, 7},
                        Row{512, 64, 6, 128, 7}, Row{1024, 64, 6, 128, 7}}) {
      FnoConfig cfg;
      cfg.rows = r.n;
      cfg.channels = r.c;
      cfg.layers = r.layers;
      cfg.modes = r.k;
      cfg.kernel_size = r.ks;
      const auto p = fno_init(cfg, 1);
      CHECK(fno_forward(p, cfg, random_vector(r.n, 2)).size() == r.n);
    }
    FnoConfig cfg2;
    cfg2.dims = 2;
    cfg2.rows = cfg2.cols = 64;
    cfg2.channels = 16;
    cfg2.layers = 4;
    cfg2.modes = 16;
    cfg2.kernel_size = 3;
    CHECK(fno_forward(fno_init(cfg2, 1), cfg2, random_vector(64 * 64, 2)).size() == 64 * 64);
  }
  SUBCASE("single layer with R = 0, identity W and unit lift/project is the activation") {
    FnoConfig cfg;
    cfg.rows = 16;
    cfg.channels = 1;
    cfg.layers = 1;
    cfg.modes = 2;
    cfg.kernel_size = 3;
    auto p = fno_zero_params(cfg);
    p.at("lift.weight").data[0] = 1.0;
    p.at("project.weight").data[0] = 1.0;
    p.at("layer0.conv").data[1] = 1.0;  // centre tap
    const auto x = random_vector(16, 4);
    const auto y = fno_forward(p, cfg, x);
    for (std::size_t i = 0; i < 16; ++i)
      CHECK(y[i] == doctest::Approx(0.5 * x[i] * (1.0 + std::erf(x[i] / std::sqrt(2.0)))).epsilon(1e-14));
  }
  SUBCASE("deterministic") {
    const auto cfg = tiny_2d();
    const auto p = random_params(cfg, 5);
    const auto x = random_vector(64, 6);
    const auto a = fno_forward(p, cfg, x), b = fno_forward(p, cfg, x);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
  SUBCASE("errors") {
    const auto cfg = tiny_1d();
    const auto p = fno_init(cfg, 1);
    CHECK_THROWS_AS(fno_forward(p, cfg, random_vector(15, 1)), std::invalid_argument);
    auto x = random_vector(16, 1);
    x[3] = std::nan("");
    CHECK_THROWS_AS(fno_forward(p, cfg, x), std::invalid_argument);
    auto big = p;
    big.at("layer1.bias").data[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH(fno_forward(big, cfg, random_vector(16, 1)), doctest::Contains("layer 1"));
    auto other = tiny_1d();
    other.channels = 3;
    CHECK_THROWS_AS(fno_forward(p, other, random_vector(16, 1)), std::invalid_argument);
  }
}

TEST_CASE("normalized application is 1-homogeneous") {
  const auto cfg = tiny_1d();
  const auto p = random_params(cfg, 7);
  const auto x = random_vector(16, 8);
  const auto base = fno_apply_normalized(p, cfg, x);
  auto x4 = x;
  for (auto& v : x4) v *= 4.0;
  const auto scaled = fno_apply_normalized(p, cfg, x4);
  for (std::size_t i = 0; i < 16; ++i) CHECK(scaled[i] == 4.0 * base[i]);
  auto x3 = x;
  for (auto& v : x3) v *= 3.0;
  const auto s3 = fno_apply_normalized(p, cfg, x3);
  std::vector<double> want(16);
  for (std::size_t i = 0; i < 16; ++i) want[i] = 3.0 * base[i];
  CHECK(rel_error(s3, want) < 1e-12);
  for (double v : fno_apply_normalized(p, cfg, std::vector<double>(16, 0.0))) CHECK(v == 0.0);
}

TEST_CASE("fno backward") {
  SUBCASE("finite differences, 1D tiny config (c=4, k=4, n=16)") { gradient_check(tiny_1d(), 11); }
  SUBCASE("finite differences, 2D") { gradient_check(tiny_2d(), 12); }
  SUBCASE("finite differences, zero padding") {
    auto cfg = tiny_1d();
    cfg.padding = ConvPadding::zero;
    gradient_check(cfg, 13);
    auto cfg2 = tiny_2d();
    cfg2.padding = ConvPadding::zero;
    gradient_check(cfg2, 14);
  }
  SUBCASE("linear network: grad of ||N x||^2 / 2 is M^T M x") {
    auto cfg = tiny_1d();
    cfg.activation = Activation::identity;
    cfg.layers = 1;
    auto p = random_params(cfg, 15);
    for (auto* name : {"lift.bias", "layer0.bias", "project.bias"})
      std::fill(p.at(name).data.begin(), p.at(name).data.end(), 0.0);
    DenseMatrix m(16, 16);
    std::vector<double> e(16, 0.0);
    for (std::size_t j = 0; j < 16; ++j) {
      e[j] = 1.0;
      const auto col = fno_forward(p, cfg, e);
      for (std::size_t i = 0; i < 16; ++i) m(i, j) = col[i];
      e[j] = 0.0;
    }
    const auto x = random_vector(16, 16);
    FnoCache cache;
    const auto out = fno_forward(p, cfg, x, &cache);
    auto grads = fno_zero_like(p);
    const auto g_in = fno_backward(p, cfg, cache, out, grads);
    std::vector<double> want(16);
    m.matvec_transpose(m.matvec(x), want);
    CHECK(rel_error(g_in, want) < 1e-12);
  }
  SUBCASE("zero upstream gradient") {
    const auto cfg = tiny_1d();
    const auto p = random_params(cfg, 17);
    FnoCache cache;
    fno_forward(p, cfg, random_vector(16, 18), &cache);
    auto grads = fno_zero_like(p);
    const auto g_in = fno_backward(p, cfg, cache, std::vector<double>(16, 0.0), grads);
    for (double v : g_in) CHECK(v == 0.0);
    for (const auto& t : grads.tensors)
      for (double v : t.data) CHECK(v == 0.0);
  }
  SUBCASE("input above the retained modes sends no gradient into the first spectral weights") {
    const auto cfg = tiny_1d();
    auto p = random_params(cfg, 19);
    std::fill(p.at("lift.bias").data.begin(), p.at("lift.bias").data.end(), 0.0);
    std::vector<double> x(16);
    for (std::size_t t = 0; t < 16; ++t) x[t] = std::cos(2.0 * M_PI * 6.0 * t / 16.0);  // bin 6 >= k = 4
    FnoCache cache;
    fno_forward(p, cfg, x, &cache);
    auto grads = fno_zero_like(p);
    fno_backward(p, cfg, cache, random_vector(16, 20), grads);
    for (double v : grads.at("layer0.spectral").data) CHECK(std::abs(v) < 1e-12);
    CHECK(norm2(grads.at("layer1.spectral").data) > 0.0);
  }
  SUBCASE("stale cache") {
    const auto cfg = tiny_1d();
    auto p = random_params(cfg, 21);
    FnoCache cache;
    fno_forward(p, cfg, random_vector(16, 22), &cache);
    auto grads = fno_zero_like(p);
    auto state = adam_init(p);
    adam_step(state, p, grads, 1e-3);
    CHECK_THROWS_AS(fno_backward(p, cfg, cache, random_vector(16, 1), grads), std::logic_error);
  }
}

namespace {

FnoParams scalar_param(double v) {
  FnoParams p;
  p.tensors.push_back({"theta", {1}, {v}});
  return p;
}

}  // namespace

TEST_CASE("adam") {
  SUBCASE("first step moves by lr against the gradient sign") {
    for (double g : {0.3, -7.0}) {
      auto p = scalar_param(1.0);
      auto s = adam_init(p);
      adam_step(s, p, scalar_param(g), 0.01);
      CHECK(p.tensors[0].data[0] == doctest::Approx(1.0 - 0.01 * (g > 0 ? 1.0 : -1.0)).epsilon(1e-6));
    }
  }
  SUBCASE("zero gradient leaves parameters and decays moments") {
    auto p = scalar_param(2.0);
    auto s = adam_init(p);
    adam_step(s, p, scalar_param(1.0), 0.1);
    const double after_one = p.tensors[0].data[0];
    const double m = s.m[0][0], v = s.v[0][0];
    auto q = scalar_param(after_one);
    // Reuse the moments with a zero gradient on a fresh copy: moments decay,
    // parameters only move by the decayed momentum.
    adam_step(s, q, scalar_param(0.0), 0.0);
    CHECK(q.tensors[0].data[0] == after_one);
    CHECK(s.m[0][0] == doctest::Approx(0.9 * m));
    CHECK(s.v[0][0] == doctest::Approx(0.999 * v));
    auto fresh = scalar_param(5.0);
    auto fs = adam_init(fresh);
    adam_step(fs, fresh, scalar_param(0.0), 0.1);
    CHECK(fresh.tensors[0].data[0] == 5.0);
  }
  SUBCASE("quadratic converges") {
    auto p = scalar_param(1.0);
    auto s = adam_init(p);
    for (int i = 0; i < 200; ++i) adam_step(s, p, scalar_param(p.tensors[0].data[0]), 0.1);
    CHECK(std::abs(p.tensors[0].data[0]) <= 0.05);
    CHECK(s.step == 200);
  }
  SUBCASE("errors") {
    auto p = scalar_param(1.0);
    auto s = adam_init(p);
    CHECK_THROWS_AS(adam_step(s, p, scalar_param(std::nan("")), 0.1), std::invalid_argument);
    CHECK(p.tensors[0].data[0] == 1.0);
    FnoParams wrong;
    CHECK_THROWS_AS(adam_step(s, p, wrong, 0.1), std::invalid_argument);
  }
}

namespace {

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.problem_hash = 0xdeadbeefcafeULL;
  c.problem = "dimension=1;n=16";
  c.hierarchy_levels = 3;
  c.seed = 42;
  c.extra = {{"note", "test"}};
  auto cfg = tiny_1d();
  c.levels.push_back({1, cfg, random_params(cfg, 30)});
  cfg.rows = 8;
  cfg.modes = 2;
  c.levels.push_back({2, cfg, random_params(cfg, 31)});
  return c;
}

}  // namespace

TEST_CASE("checkpoint") {
  const auto c = sample_checkpoint();
  std::ostringstream os;
  write_checkpoint(os, c);
  const std::string bytes = os.str();

  SUBCASE("round trip is bitwise exact") {
    std::istringstream is(bytes);
    const auto r = read_checkpoint(is, c.problem_hash);
    REQUIRE(r.levels.size() == 2);
    CHECK(r.seed == 42);
    CHECK(r.hierarchy_levels == 3);
    CHECK(r.problem == c.problem);
    CHECK(r.extra.at("note") == "test");
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(r.levels[l].config == c.levels[l].config);
      for (std::size_t k = 0; k < c.levels[l].params.tensors.size(); ++k) {
        const auto& a = r.levels[l].params.tensors[k].data;
        const auto& b = c.levels[l].params.tensors[k].data;
        REQUIRE(a.size() == b.size());
        CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
      }
    }
  }
  SUBCASE("file round trip") {
    const auto path = (std::filesystem::temp_directory_path() / "nmg_test_ckpt.bin").string();
    save_checkpoint(path, c);
    const auto r = load_checkpoint(path);
    CHECK(r.levels[1].params.tensors[2].data == c.levels[1].params.tensors[2].data);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
  }
  SUBCASE("hash mismatch") {
    std::istringstream strict(bytes);
    CHECK_THROWS_AS(read_checkpoint(strict, 1234), CheckpointError);
    std::istringstream warn(bytes);
    std::ostringstream log;
    CHECK_NOTHROW(read_checkpoint(warn, 1234, HashCheck::warn, &log));
    CHECK(log.str().find("warning") != std::string::npos);
  }
  SUBCASE("truncation anywhere is reported as corrupt") {
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
      std::istringstream is(bytes.substr(0, cut));
      CHECK_THROWS_WITH(read_checkpoint(is), doctest::Contains("corrupt checkpoint"));
    }
  }
  SUBCASE("version mismatch") {
    auto mutated = bytes;
    mutated[8] = 9;
    std::istringstream is(mutated);
    CHECK_THROWS_WITH(read_checkpoint(is), doctest::Contains("unsupported checkpoint version 9"));
  }
}
