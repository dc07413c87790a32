#include "chemclip/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "chemclip/error.hpp"

namespace chemclip {
namespace {

constexpr char kMagic[4] = {'C', 'C', 'L', 'P'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int s = 0; s < 64; s += 8) out.push_back(static_cast<std::uint8_t>(bits >> s));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::kFormatError, "checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int s = 0; s < 4; ++s) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * s);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int s = 0; s < 8; ++s) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * s);
    return std::bit_cast<double>(v);
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_container(const Container& container) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  for (const auto& t : container.tensors) {
    if (t.name.empty()) throw Error(ErrorCode::kInvalidArgument, "tensor names must be non-empty");
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_u32(out, static_cast<std::uint32_t>(t.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(t.value.cols()));
    for (double v : t.value.values()) put_f64(out, v);
  }
  put_u32(out, 0);
  put_u32(out, static_cast<std::uint32_t>(container.json.size()));
  out.insert(out.end(), container.json.begin(), container.json.end());
  return out;
}

Container decode_container(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kFormatError, "bad checkpoint magic");
  }
  Reader in(bytes);
  in.text(4);
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "checkpoint version " + std::to_string(version));
  }
  Container c;
  while (true) {
    const std::uint32_t name_len = in.u32();
    if (name_len == 0) break;
    NamedMatrix t;
    t.name = in.text(name_len);
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    in.need(static_cast<std::size_t>(rows) * cols * 8);
    t.value = Matrix(rows, cols);
    for (double& v : t.value.values()) v = in.f64();
    c.tensors.push_back(std::move(t));
  }
  const std::uint32_t json_len = in.u32();
  c.json = in.text(json_len);
  if (!in.done()) throw Error(ErrorCode::kFormatError, "trailing bytes after checkpoint trailer");
  return c;
}

void write_container(const std::filesystem::path& path, const Container& container) {
  const auto bytes = encode_container(container);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingInput, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

std::vector<NamedMatrix> mlp_tensors(const Mlp& mlp, const std::string& prefix) {
  std::vector<NamedMatrix> out;
  for (std::size_t i = 0; i < mlp.layers().size(); ++i) {
    out.push_back({prefix + "." + std::to_string(i) + ".weight", mlp.layers()[i].weight});
    out.push_back({prefix + "." + std::to_string(i) + ".bias", mlp.layers()[i].bias});
  }
  return out;
}

Mlp mlp_from_tensors(const std::vector<NamedMatrix>& tensors, const std::string& prefix, double dropout_rate) {
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0;; ++i) {
    const std::string w = prefix + "." + std::to_string(i) + ".weight";
    const std::string b = prefix + "." + std::to_string(i) + ".bias";
    const NamedMatrix* wt = nullptr;
    const NamedMatrix* bt = nullptr;
    for (const auto& t : tensors) {
      if (t.name == w) wt = &t;
      if (t.name == b) bt = &t;
    }
    if (wt == nullptr && bt == nullptr) break;
    if (wt == nullptr || bt == nullptr) throw Error(ErrorCode::kFormatError, "incomplete layer " + w);
    layers.push_back({wt->value, bt->value});
  }
  if (layers.empty()) throw Error(ErrorCode::kFormatError, "no tensors with prefix '" + prefix + "'");
  try {
    return Mlp(std::move(layers), dropout_rate);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormatError, e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ChemClipModel& model, const TrainConfig& config,
                     std::size_t epoch) {
  Container c;
  c.tensors = mlp_tensors(model.inorganic_head, "inorganic");
  auto org = mlp_tensors(model.organic_head, "organic");
  c.tensors.insert(c.tensors.end(), org.begin(), org.end());
  nlohmann::json trailer = {{"kind", "chemclip-model"},
                            {"epoch", epoch},
                            {"temperature", model.temperature},
                            {"train_config", nlohmann::json::parse(train_config_to_json(config))}};
  c.json = trailer.dump();
  write_container(path, c);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const Container c = read_container(path);
  nlohmann::json trailer;
  try {
    trailer = nlohmann::json::parse(c.json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("checkpoint trailer: ") + e.what());
  }
  if (!trailer.is_object() || trailer.value("kind", "") != "chemclip-model" || !trailer.contains("train_config")) {
    throw Error(ErrorCode::kFormatError, "checkpoint trailer is not a chemclip model description");
  }
  Checkpoint ck;
  ck.config = train_config_from_json(trailer["train_config"].dump());
  ck.epoch = trailer.value("epoch", std::size_t{0});
  ck.model.inorganic_head = mlp_from_tensors(c.tensors, "inorganic", ck.config.dropout);
  ck.model.organic_head = mlp_from_tensors(c.tensors, "organic", ck.config.dropout);
  ck.model.temperature = trailer.value("temperature", ck.config.temperature);
  if (ck.model.inorganic_head.output_dim() != ck.model.organic_head.output_dim()) {
    throw Error(ErrorCode::kFormatError, "heads disagree on embedding width");
  }
  return ck;
}

}  // namespace chemclip
