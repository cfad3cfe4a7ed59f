#include "e2eslu/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {

using nlohmann::json;

constexpr char kMagic[7] = {'E', '2', 'E', 'S', 'L', 'U', '1'};

void put(std::ostream& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get(std::istream& in, int bytes) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), bytes)) throw FormatError("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParameterStore& store, const json& config) {
  out.write(kMagic, sizeof(kMagic));
  put(out, kCheckpointVersion, 4);
  put(out, store.entries().size(), 4);
  for (const auto& e : store.entries()) {
    if (e->name.size() > 0xffff) throw FormatError("parameter name too long: " + e->name);
    put(out, e->name.size(), 2);
    out.write(e->name.data(), static_cast<std::streamsize>(e->name.size()));
    const Shape& shape = e->tensor.shape();
    put(out, shape.size(), 1);
    for (std::size_t d : shape) put(out, d, 4);
    for (Real v : e->tensor.values()) put(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  }
  out << config.dump();
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store,
                     const json& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  write_checkpoint(out, store, config);
  if (!out) throw FormatError("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const auto version = get(in, 4);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get(in, 4);
  Checkpoint ck;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = get(in, 2);
    std::string name(len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(len))) {
      throw FormatError("truncated checkpoint");
    }
    const auto rank = get(in, 1);
    Shape shape;
    std::size_t n = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      shape.push_back(get(in, 4));
      if (shape.back() == 0) throw FormatError("zero extent in checkpoint tensor " + name);
      n *= shape.back();
      if (n > (std::size_t{1} << 31)) throw FormatError("checkpoint tensor " + name + " too large");
    }
    std::vector<Real> data(n);
    for (auto& v : data) v = static_cast<Real>(std::bit_cast<float>(static_cast<std::uint32_t>(get(in, 4))));
    if (!ck.tensors.emplace(name, Tensor(shape, std::move(data))).second) {
      throw FormatError("duplicate tensor " + name + " in checkpoint");
    }
  }
  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    ck.config = rest.empty() ? json::object() : json::parse(rest);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint config is not valid JSON: ") + e.what());
  }
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

json model_document(const Trainable& model, const TrainConfig* train) {
  json j = to_flat_config(model.config(), train);
  j["model_kind"] = model.kind();
  return j;
}

void save_model(const std::filesystem::path& path, const Trainable& model, const TrainConfig* train) {
  save_checkpoint(path, model.parameters(), model_document(model, train));
}

void restore_parameters(const Checkpoint& ckpt, ParameterStore& store) {
  for (auto& e : store.entries()) {
    auto it = ckpt.tensors.find(e->name);
    if (it == ckpt.tensors.end()) throw FormatError("checkpoint lacks parameter " + e->name);
    if (it->second.shape() != e->tensor.shape()) {
      throw FormatError("checkpoint parameter " + e->name + " has shape " +
                        shape_string(it->second.shape()) + ", expected " +
                        shape_string(e->tensor.shape()));
    }
    std::copy(it->second.values().begin(), it->second.values().end(), e->tensor.values().begin());
  }
}

std::unique_ptr<Trainable> load_model(const std::filesystem::path& path) {
  Checkpoint ck = load_checkpoint(path);
  if (!ck.config.contains("model_kind") || !ck.config["model_kind"].is_string()) {
    throw FormatError("checkpoint config lacks model_kind");
  }
  const std::string kind = ck.config["model_kind"].get<std::string>();
  json flat = ck.config;
  flat.erase("model_kind");
  ModelConfig mc;
  TrainConfig tc;
  apply_flat_config(flat, mc, &tc);
  auto model = make_model(kind, mc);
  restore_parameters(ck, model->parameters());
  return model;
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
