#include "nmg/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace nmg {

namespace {

constexpr std::array<char, 8> kMagic{'N', 'M', 'G', 'C', 'K', 'P', 'T', '\0'};
constexpr std::array<char, 8> kEndMagic{'N', 'M', 'G', 'E', 'N', 'D', '\0', '\0'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

template <typename U>
void put_le(std::ostream& os, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  os.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }

[[noreturn]] void corrupt(const std::string& what) { throw CheckpointError("corrupt checkpoint: " + what); }

void get_bytes(std::istream& is, char* dst, std::size_t n, const char* what) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) corrupt(std::string("truncated ") + what);
}

template <typename U>
U get_le(std::istream& is, const char* what) {
  std::array<unsigned char, sizeof(U)> bytes;
  get_bytes(is, reinterpret_cast<char*>(bytes.data()), bytes.size(), what);
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

std::string tensor_key(int level, const std::string& name) { return "level" + std::to_string(level) + "/" + name; }

}  // namespace

nlohmann::json to_json(const FnoConfig& cfg) {
  return {{"dims", cfg.dims},
          {"rows", cfg.rows},
          {"cols", cfg.cols},
          {"channels", cfg.channels},
          {"layers", cfg.layers},
          {"modes", cfg.modes},
          {"kernel_size", cfg.kernel_size},
          {"activation", to_string(cfg.activation)},
          {"padding", to_string(cfg.padding)}};
}

FnoConfig fno_config_from_json(const nlohmann::json& j) {
  FnoConfig cfg;
  cfg.dims = j.at("dims").get<int>();
  cfg.rows = j.at("rows").get<std::size_t>();
  cfg.cols = j.at("cols").get<std::size_t>();
  cfg.channels = j.at("channels").get<int>();
  cfg.layers = j.at("layers").get<int>();
  cfg.modes = j.at("modes").get<std::size_t>();
  cfg.kernel_size = j.at("kernel_size").get<int>();
  cfg.activation = activation_from_string(j.value("activation", "gelu"));
  cfg.padding = conv_padding_from_string(j.value("padding", "circular"));
  cfg.validate();
  return cfg;
}

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  std::uint32_t count = 0;
  for (const auto& lv : ckpt.levels) count += static_cast<std::uint32_t>(lv.params.tensors.size());
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kCheckpointVersion);
  put_le<std::uint32_t>(os, count);
  for (const auto& lv : ckpt.levels)
    for (const auto& t : lv.params.tensors) {
      const std::string key = tensor_key(lv.level, t.name);
      put_le<std::uint32_t>(os, static_cast<std::uint32_t>(key.size()));
      os.write(key.data(), static_cast<std::streamsize>(key.size()));
      put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
      for (auto d : t.shape) put_le<std::uint64_t>(os, d);
      for (double v : t.data) put_f64(os, v);
    }

  nlohmann::json meta;
  meta["format_version"] = kCheckpointVersion;
  meta["problem_hash"] = ckpt.problem_hash;
  meta["problem"] = ckpt.problem;
  meta["hierarchy_levels"] = ckpt.hierarchy_levels;
  meta["seed"] = ckpt.seed;
  meta["extra"] = ckpt.extra;
  auto& levels = meta["levels"] = nlohmann::json::array();
  for (const auto& lv : ckpt.levels) levels.push_back({{"level", lv.level}, {"config", to_json(lv.config)}});
  const std::string text = meta.dump();
  put_le<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.write(kEndMagic.data(), kEndMagic.size());
  if (!os) throw CheckpointError("failed to write checkpoint");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open '" + path + "' for writing");
  write_checkpoint(os, ckpt);
}

Checkpoint read_checkpoint(std::istream& is, std::optional<std::uint64_t> expected_hash, HashCheck mode,
                           std::ostream* warn) {
  std::array<char, 8> magic{};
  get_bytes(is, magic.data(), magic.size(), "header");
  if (magic != kMagic) corrupt("bad magic");
  const auto version = get_le<std::uint32_t>(is, "header");
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  const auto count = get_le<std::uint32_t>(is, "header");

  std::vector<Tensor> raw;
  raw.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    Tensor t;
    const auto name_len = get_le<std::uint32_t>(is, "tensor name");
    if (name_len > 4096) corrupt("tensor name too long");
    t.name.resize(name_len);
    get_bytes(is, t.name.data(), name_len, "tensor name");
    const auto rank = get_le<std::uint32_t>(is, "tensor rank");
    if (rank > 8) corrupt("tensor rank too large");
    std::uint64_t elements = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = get_le<std::uint64_t>(is, "tensor shape");
      if (d > kMaxElements) corrupt("tensor dimension too large");
      elements *= d;
      if (elements > kMaxElements) corrupt("tensor too large");
      t.shape.push_back(static_cast<std::size_t>(d));
    }
    t.data.resize(static_cast<std::size_t>(elements));
    for (auto& v : t.data) v = std::bit_cast<double>(get_le<std::uint64_t>(is, "tensor data"));
    raw.push_back(std::move(t));
  }

  const auto meta_len = get_le<std::uint64_t>(is, "metadata length");
  if (meta_len > (std::uint64_t{1} << 30)) corrupt("metadata too large");
  std::string text(static_cast<std::size_t>(meta_len), '\0');
  get_bytes(is, text.data(), text.size(), "metadata");
  std::array<char, 8> end{};
  get_bytes(is, end.data(), end.size(), "trailer");
  if (end != kEndMagic) corrupt("bad trailer");

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("metadata is not valid JSON (") + e.what() + ")");
  }

  Checkpoint ckpt;
  try {
    ckpt.problem_hash = meta.at("problem_hash").get<std::uint64_t>();
    ckpt.problem = meta.at("problem").get<std::string>();
    ckpt.hierarchy_levels = meta.at("hierarchy_levels").get<int>();
    ckpt.seed = meta.at("seed").get<std::uint64_t>();
    ckpt.extra = meta.value("extra", nlohmann::json::object());
    for (const auto& lj : meta.at("levels")) {
      Checkpoint::Level lv;
      lv.level = lj.at("level").get<int>();
      lv.config = fno_config_from_json(lj.at("config"));
      ckpt.levels.push_back(std::move(lv));
    }
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    corrupt(std::string("bad metadata (") + e.what() + ")");
  }

  std::size_t cursor = 0;
  for (auto& lv : ckpt.levels) {
    lv.params = fno_zero_params(lv.config);
    for (auto& t : lv.params.tensors) {
      if (cursor >= raw.size()) corrupt("missing tensors");
      auto& src = raw[cursor++];
      if (src.name != tensor_key(lv.level, t.name) || src.shape != t.shape)
        corrupt("tensor '" + src.name + "' does not match the recorded configuration");
      t.data = std::move(src.data);
    }
  }
  if (cursor != raw.size()) corrupt("unexpected extra tensors");

  if (expected_hash && *expected_hash != ckpt.problem_hash && mode != HashCheck::ignore) {
    std::ostringstream msg;
    msg << "checkpoint was trained for problem hash " << ckpt.problem_hash << " (" << ckpt.problem
        << "), expected " << *expected_hash;
    if (mode == HashCheck::strict) throw CheckpointError(msg.str());
    if (warn) *warn << "warning: " << msg.str() << '\n';
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, std::optional<std::uint64_t> expected_hash, HashCheck mode,
                           std::ostream* warn) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(is, expected_hash, mode, warn);
}

}  // namespace nmg
