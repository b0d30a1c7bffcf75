#include "nmg/fno.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nmg/vec.hpp"

namespace nmg {

std::string to_string(Activation a) { return a == Activation::gelu ? "gelu" : "identity"; }
std::string to_string(ConvPadding p) { return p == ConvPadding::circular ? "circular" : "zero"; }

Activation activation_from_string(const std::string& s) {
  if (s == "gelu") return Activation::gelu;
  if (s == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

ConvPadding conv_padding_from_string(const std::string& s) {
  if (s == "circular") return ConvPadding::circular;
  if (s == "zero") return ConvPadding::zero;
  throw std::invalid_argument("unknown conv padding '" + s + "'");
}

void FnoConfig::validate() const {
  if (dims != 1 && dims != 2) throw std::invalid_argument("fno.dims: must be 1 or 2");
  if (rows < 2) throw std::invalid_argument("fno.rows: must be >= 2");
  if (dims == 1 && cols != 1) throw std::invalid_argument("fno.cols: must be 1 for a 1D smoother");
  if (dims == 2 && cols < 2) throw std::invalid_argument("fno.cols: must be >= 2 for a 2D smoother");
  if (channels < 1) throw std::invalid_argument("fno.channels: must be positive");
  if (layers < 1) throw std::invalid_argument("fno.layers: must be positive");
  if (modes < 1 || modes > rows / 2 || (dims == 2 && modes > cols / 2))
    throw std::invalid_argument("fno.modes: must lie in [1, n/2]");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw std::invalid_argument("fno.kernel_size: must be odd and positive");
  if (static_cast<std::size_t>(kernel_size) > rows || (dims == 2 && static_cast<std::size_t>(kernel_size) > cols))
    throw std::invalid_argument("fno.kernel_size: larger than the grid");
}

std::size_t FnoConfig::retained_bins() const { return dims == 1 ? modes : 2 * modes * modes; }

std::vector<std::size_t> FnoConfig::retained_indices() const {
  std::vector<std::size_t> idx;
  idx.reserve(retained_bins());
  if (dims == 1) {
    for (std::size_t j = 0; j < modes; ++j) idx.push_back(j);
    return idx;
  }
  for (std::size_t q = 0; q < modes; ++q) {
    for (std::size_t r = 0; r < modes; ++r) idx.push_back(r + q * rows);
    for (std::size_t r = rows - modes; r < rows; ++r) idx.push_back(r + q * rows);
  }
  return idx;
}

std::size_t FnoConfig::kernel_taps() const {
  const auto k = static_cast<std::size_t>(kernel_size);
  return dims == 1 ? k : k * k;
}

std::size_t FnoParams::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.data.size();
  return n;
}

Tensor& FnoParams::at(const std::string& name) {
  for (auto& t : tensors)
    if (t.name == name) return t;
  throw std::out_of_range("no parameter tensor named '" + name + "'");
}

const Tensor& FnoParams::at(const std::string& name) const { return const_cast<FnoParams*>(this)->at(name); }

bool FnoParams::all_finite() const {
  for (const auto& t : tensors)
    if (!nmg::all_finite(t.data)) return false;
  return true;
}

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

Tensor make_tensor(std::string name, std::vector<std::size_t> shape) {
  Tensor t{std::move(name), std::move(shape), {}};
  t.data.assign(product(t.shape), 0.0);
  return t;
}

std::string layer_name(int layer, const char* what) { return "layer" + std::to_string(layer) + "." + what; }

// Tensor positions inside FnoParams::tensors.
constexpr std::size_t kLiftW = 0, kLiftB = 1;
std::size_t spectral_slot(int layer) { return 2 + 3 * static_cast<std::size_t>(layer); }
std::size_t conv_slot(int layer) { return 3 + 3 * static_cast<std::size_t>(layer); }
std::size_t bias_slot(int layer) { return 4 + 3 * static_cast<std::size_t>(layer); }
std::size_t project_w_slot(const FnoConfig& cfg) { return 2 + 3 * static_cast<std::size_t>(cfg.layers); }
std::size_t project_b_slot(const FnoConfig& cfg) { return 3 + 3 * static_cast<std::size_t>(cfg.layers); }

void check_shapes(const FnoParams& params, const FnoConfig& cfg) {
  const auto ref = fno_zero_params(cfg);
  if (params.tensors.size() != ref.tensors.size())
    throw std::invalid_argument("fno: parameter set does not match the configuration");
  for (std::size_t i = 0; i < ref.tensors.size(); ++i)
    if (params.tensors[i].shape != ref.tensors[i].shape || params.tensors[i].data.size() != ref.tensors[i].data.size())
      throw std::invalid_argument("fno: tensor '" + ref.tensors[i].name + "' has the wrong shape");
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf = std::exp(-0.5 * x * x) * kInvSqrt2 * std::numbers::inv_sqrtpi;
  return cdf + x * pdf;
}

struct Shift {
  long dr;
  long dc;
};

Shift tap_shift(const FnoConfig& cfg, std::size_t tap) {
  const long k = cfg.kernel_size, half = k / 2;
  if (cfg.dims == 1) return {static_cast<long>(tap) - half, 0};
  return {static_cast<long>(tap % static_cast<std::size_t>(k)) - half,
          static_cast<long>(tap / static_cast<std::size_t>(k)) - half};
}

long wrap(long i, long n) {
  i %= n;
  return i < 0 ? i + n : i;
}

// out[r, q] += w * in[r + dr, q + dc] over a column-major rows x cols grid;
// out-of-range sources wrap (circular) or read zero.
void shift_accumulate(double w, const double* in, double* out, Shift s, std::size_t rows, std::size_t cols,
                      bool circular) {
  const long nr = static_cast<long>(rows), nc = static_cast<long>(cols);
  for (long q = 0; q < nc; ++q) {
    long qs = q + s.dc;
    if (qs < 0 || qs >= nc) {
      if (!circular) continue;
      qs = wrap(qs, nc);
    }
    const double* src = in + qs * nr;
    double* dst = out + q * nr;
    const long lo = std::max(0L, -s.dr), hi = std::min(nr, nr - s.dr);
    for (long r = lo; r < hi; ++r) dst[r] += w * src[r + s.dr];
    if (!circular) continue;
    for (long r = 0; r < lo; ++r) dst[r] += w * src[r + s.dr + nr];
    for (long r = std::max(hi, 0L); r < nr; ++r) dst[r] += w * src[r + s.dr - nr];
  }
}

// sum_{r,q} a[r, q] * b[r + dr, q + dc] with the same boundary rule.
double shift_dot(const double* a, const double* b, Shift s, std::size_t rows, std::size_t cols, bool circular) {
  const long nr = static_cast<long>(rows), nc = static_cast<long>(cols);
  double acc = 0.0;
  for (long q = 0; q < nc; ++q) {
    long qs = q + s.dc;
    if (qs < 0 || qs >= nc) {
      if (!circular) continue;
      qs = wrap(qs, nc);
    }
    const double* src = b + qs * nr;
    const double* av = a + q * nr;
    const long lo = std::max(0L, -s.dr), hi = std::min(nr, nr - s.dr);
    for (long r = lo; r < hi; ++r) acc += av[r] * src[r + s.dr];
    if (!circular) continue;
    for (long r = 0; r < lo; ++r) acc += av[r] * src[r + s.dr + nr];
    for (long r = std::max(hi, 0L); r < nr; ++r) acc += av[r] * src[r + s.dr - nr];
  }
  return acc;
}

void forward_transform(std::span<cplx> v, const FnoConfig& cfg) {
  if (cfg.dims == 1)
    dft1_inplace(v);
  else
    dft2_inplace(v, cfg.rows, cfg.cols);
}

void inverse_transform(std::span<cplx> v, const FnoConfig& cfg) {
  if (cfg.dims == 1)
    idft1_inplace(v);
  else
    idft2_inplace(v, cfg.rows, cfg.cols);
}

}  // namespace

FnoParams fno_zero_params(const FnoConfig& cfg) {
  cfg.validate();
  const auto c = static_cast<std::size_t>(cfg.channels);
  FnoParams p;
  p.tensors.push_back(make_tensor("lift.weight", {c}));
  p.tensors.push_back(make_tensor("lift.bias", {c}));
  for (int l = 0; l < cfg.layers; ++l) {
    p.tensors.push_back(make_tensor(layer_name(l, "spectral"), {c, c, cfg.retained_bins(), 2}));
    p.tensors.push_back(make_tensor(layer_name(l, "conv"), {c, c, cfg.kernel_taps()}));
    p.tensors.push_back(make_tensor(layer_name(l, "bias"), {c}));
  }
  p.tensors.push_back(make_tensor("project.weight", {c}));
  p.tensors.push_back(make_tensor("project.bias", {1}));
  return p;
}

FnoParams fno_init(const FnoConfig& cfg, std::uint64_t seed) {
  auto p = fno_zero_params(cfg);
  std::mt19937_64 rng(seed);
  auto fill = [&](Tensor& t, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : t.data) v = dist(rng);
  };
  const double c = cfg.channels;
  fill(p.tensors[kLiftW], 1.0);
  for (int l = 0; l < cfg.layers; ++l) {
    fill(p.tensors[spectral_slot(l)], 1.0 / (c * static_cast<double>(cfg.modes)));
    fill(p.tensors[conv_slot(l)], 1.0 / std::sqrt(c * static_cast<double>(cfg.kernel_taps())));
  }
  fill(p.tensors[project_w_slot(cfg)], 1.0 / std::sqrt(c));
  return p;
}

FnoParams fno_zero_like(const FnoParams& params) {
  FnoParams g;
  g.tensors.reserve(params.tensors.size());
  for (const auto& t : params.tensors) g.tensors.push_back(make_tensor(t.name, t.shape));
  return g;
}

std::vector<double> fno_forward(const FnoParams& params, const FnoConfig& cfg, std::span<const double> input,
                                FnoCache* cache) {
  cfg.validate();
  check_shapes(params, cfg);
  const std::size_t n = cfg.size();
  if (input.size() != n)
    throw std::invalid_argument("fno: input has " + std::to_string(input.size()) + " entries, expected " +
                                std::to_string(n));
  if (!nmg::all_finite(input)) throw std::invalid_argument("fno: non-finite input");

  const auto c = static_cast<std::size_t>(cfg.channels);
  const auto bins = cfg.retained_indices();
  const std::size_t nb = bins.size();
  const bool circular = cfg.padding == ConvPadding::circular;
  const std::size_t taps = cfg.kernel_taps();

  if (cache) {
    cache->params = &params;
    cache->generation = params.generation;
    cache->input.assign(input.begin(), input.end());
    cache->z.assign(static_cast<std::size_t>(cfg.layers) + 1, {});
    cache->z_hat.assign(static_cast<std::size_t>(cfg.layers), {});
    cache->pre.assign(static_cast<std::size_t>(cfg.layers), {});
  }

  const auto& lw = params.tensors[kLiftW].data;
  const auto& lb = params.tensors[kLiftB].data;
  std::vector<double> z(c * n);
  for (std::size_t o = 0; o < c; ++o)
    for (std::size_t t = 0; t < n; ++t) z[o * n + t] = lw[o] * input[t] + lb[o];

  ComplexVec z_hat(c * n), y_hat(n);
  std::vector<double> pre(c * n);
  for (int l = 0; l < cfg.layers; ++l) {
    const auto& spec = params.tensors[spectral_slot(l)].data;
    const auto& conv = params.tensors[conv_slot(l)].data;
    const auto& bias = params.tensors[bias_slot(l)].data;

    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t t = 0; t < n; ++t) z_hat[i * n + t] = z[i * n + t];
      forward_transform(std::span<cplx>(z_hat).subspan(i * n, n), cfg);
    }

    for (std::size_t o = 0; o < c; ++o) {
      std::fill(y_hat.begin(), y_hat.end(), cplx{0.0, 0.0});
      for (std::size_t i = 0; i < c; ++i) {
        const double* r = spec.data() + (o * c + i) * nb * 2;
        const cplx* zi = z_hat.data() + i * n;
        for (std::size_t b = 0; b < nb; ++b) y_hat[bins[b]] += cplx(r[2 * b], r[2 * b + 1]) * zi[bins[b]];
      }
      inverse_transform(y_hat, cfg);
      double* p = pre.data() + o * n;
      for (std::size_t t = 0; t < n; ++t) p[t] = y_hat[t].real() + bias[o];
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t k = 0; k < taps; ++k) {
          const double w = conv[(o * c + i) * taps + k];
          if (w != 0.0) shift_accumulate(w, z.data() + i * n, p, tap_shift(cfg, k), cfg.rows, cfg.cols, circular);
        }
    }
    if (!nmg::all_finite(pre)) throw std::runtime_error("fno: non-finite pre-activation in layer " + std::to_string(l));

    if (cache) {
      cache->z[static_cast<std::size_t>(l)] = z;
      cache->z_hat[static_cast<std::size_t>(l)] = z_hat;
      cache->pre[static_cast<std::size_t>(l)] = pre;
    }
    for (std::size_t t = 0; t < c * n; ++t) z[t] = cfg.activation == Activation::gelu ? gelu(pre[t]) : pre[t];
  }
  if (cache) cache->z[static_cast<std::size_t>(cfg.layers)] = z;

  const auto& pw = params.tensors[project_w_slot(cfg)].data;
  const double pb = params.tensors[project_b_slot(cfg)].data[0];
  std::vector<double> out(n, pb);
  for (std::size_t o = 0; o < c; ++o)
    for (std::size_t t = 0; t < n; ++t) out[t] += pw[o] * z[o * n + t];
  if (!nmg::all_finite(out)) throw std::runtime_error("fno: non-finite output in projection");
  return out;
}

std::vector<double> fno_backward(const FnoParams& params, const FnoConfig& cfg, const FnoCache& cache,
                                 std::span<const double> grad_out, FnoParams& grads) {
  if (cache.params != &params || cache.generation != params.generation)
    throw std::logic_error("fno: stale cache (parameters changed since the forward pass)");
  check_shapes(grads, cfg);
  const std::size_t n = cfg.size();
  if (grad_out.size() != n) throw std::invalid_argument("fno: gradient size mismatch");

  const auto c = static_cast<std::size_t>(cfg.channels);
  const auto bins = cfg.retained_indices();
  const std::size_t nb = bins.size();
  const bool circular = cfg.padding == ConvPadding::circular;
  const std::size_t taps = cfg.kernel_taps();
  const double nd = static_cast<double>(n);

  // Projection.
  const auto& zl = cache.z[static_cast<std::size_t>(cfg.layers)];
  auto& g_pw = grads.tensors[project_w_slot(cfg)].data;
  auto& g_pb = grads.tensors[project_b_slot(cfg)].data;
  const auto& pw = params.tensors[project_w_slot(cfg)].data;
  std::vector<double> gz(c * n);
  double gsum = 0.0;
  for (std::size_t t = 0; t < n; ++t) gsum += grad_out[t];
  g_pb[0] += gsum;
  for (std::size_t o = 0; o < c; ++o) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += grad_out[t] * zl[o * n + t];
      gz[o * n + t] = pw[o] * grad_out[t];
    }
    g_pw[o] += acc;
  }

  std::vector<double> gp(c * n), gz_in(c * n);
  ComplexVec g_hat(c * n), gz_hat(n);
  for (int l = cfg.layers - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const auto& pre = cache.pre[li];
    const auto& z = cache.z[li];
    const auto& z_hat = cache.z_hat[li];
    const auto& spec = params.tensors[spectral_slot(l)].data;
    const auto& conv = params.tensors[conv_slot(l)].data;
    auto& g_spec = grads.tensors[spectral_slot(l)].data;
    auto& g_conv = grads.tensors[conv_slot(l)].data;
    auto& g_bias = grads.tensors[bias_slot(l)].data;

    for (std::size_t t = 0; t < c * n; ++t)
      gp[t] = cfg.activation == Activation::gelu ? gz[t] * gelu_grad(pre[t]) : gz[t];

    std::fill(gz_in.begin(), gz_in.end(), 0.0);
    for (std::size_t o = 0; o < c; ++o) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += gp[o * n + t];
      g_bias[o] += acc;
      // Spectral branch: pre = Re(IDFT(Y)), so dL/dY = DFT(gp) / N.
      for (std::size_t t = 0; t < n; ++t) g_hat[o * n + t] = gp[o * n + t];
      forward_transform(std::span<cplx>(g_hat).subspan(o * n, n), cfg);
      for (std::size_t t = 0; t < n; ++t) g_hat[o * n + t] /= nd;
    }

    for (std::size_t i = 0; i < c; ++i) {
      std::fill(gz_hat.begin(), gz_hat.end(), cplx{0.0, 0.0});
      const cplx* zi = z_hat.data() + i * n;
      for (std::size_t o = 0; o < c; ++o) {
        const double* r = spec.data() + (o * c + i) * nb * 2;
        double* gr = g_spec.data() + (o * c + i) * nb * 2;
        const cplx* go = g_hat.data() + o * n;
        for (std::size_t b = 0; b < nb; ++b) {
          const std::size_t j = bins[b];
          const cplx grad_r = go[j] * std::conj(zi[j]);
          gr[2 * b] += grad_r.real();
          gr[2 * b + 1] += grad_r.imag();
          gz_hat[j] += std::conj(cplx(r[2 * b], r[2 * b + 1])) * go[j];
        }
      }
      // Z_hat = DFT(Z) with real Z: dL/dZ = Re(N * IDFT(dL/dZ_hat)).
      inverse_transform(gz_hat, cfg);
      double* gzi = gz_in.data() + i * n;
      for (std::size_t t = 0; t < n; ++t) gzi[t] += nd * gz_hat[t].real();

      for (std::size_t o = 0; o < c; ++o)
        for (std::size_t k = 0; k < taps; ++k) {
          const Shift s = tap_shift(cfg, k);
          g_conv[(o * c + i) * taps + k] += shift_dot(gp.data() + o * n, z.data() + i * n, s, cfg.rows, cfg.cols,
                                                      circular);
          const double w = conv[(o * c + i) * taps + k];
          if (w != 0.0)
            shift_accumulate(w, gp.data() + o * n, gzi, {-s.dr, -s.dc}, cfg.rows, cfg.cols, circular);
        }
    }
    gz.swap(gz_in);
  }

  // Lift.
  auto& g_lw = grads.tensors[kLiftW].data;
  auto& g_lb = grads.tensors[kLiftB].data;
  const auto& lw = params.tensors[kLiftW].data;
  std::vector<double> g_in(n, 0.0);
  for (std::size_t o = 0; o < c; ++o) {
    double aw = 0.0, ab = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      aw += gz[o * n + t] * cache.input[t];
      ab += gz[o * n + t];
      g_in[t] += lw[o] * gz[o * n + t];
    }
    g_lw[o] += aw;
    g_lb[o] += ab;
  }
  return g_in;
}

std::vector<double> fno_apply_normalized(const FnoParams& params, const FnoConfig& cfg, std::span<const double> x) {
  const double nrm = norm2(x);
  if (nrm == 0.0) return std::vector<double>(x.size(), 0.0);
  std::vector<double> scaled(x.begin(), x.end());
  for (auto& v : scaled) v /= nrm;
  auto out = fno_forward(params, cfg, scaled);
  for (auto& v : out) v *= nrm;
  return out;
}

}  // namespace nmg
