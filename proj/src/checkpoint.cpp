#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dnaembed/errors.hpp"
#include "dnaembed/json_io.hpp"
#include "dnaembed/nets.hpp"

namespace dnaembed {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

constexpr char kMagic[8] = {'D', 'N', 'A', 'E', 'M', 'B', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }
  void put_bytes(std::string_view s) { bytes_.append(s); }
  void put_array(const std::string& name, const Shape& shape, std::span<const double> values) {
    put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    put_bytes(name);
    put<std::uint32_t>(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t e : shape) put<std::uint64_t>(e);
    for (double v : values) put<double>(v);
  }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint is truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

struct StoredArray {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

StoredArray read_array(Reader& r) {
  StoredArray a;
  a.name = r.get_bytes(r.get<std::uint32_t>());
  const auto rank = r.get<std::uint32_t>();
  if (rank > 8) throw FormatError("checkpoint array " + a.name + " has implausible rank");
  std::size_t n = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    a.shape.push_back(r.get<std::uint64_t>());
    n *= a.shape.back();
  }
  if (n > (std::size_t{1} << 32)) throw FormatError("checkpoint array " + a.name + " is too large");
  a.values.resize(n);
  for (double& v : a.values) v = r.get<double>();
  return a;
}

void expect_array(const StoredArray& a, const std::string& name, const Shape& shape) {
  if (a.name != name || a.shape != shape) {
    throw FormatError("checkpoint array " + a.name + " " + shape_str(a.shape) +
                      " does not match the model's " + name + " " + shape_str(shape));
  }
}

}  // namespace

nlohmann::json spec_to_json(const ModelSpec& spec) {
  return {{"arch", arch_name(spec.arch)},     {"input_len", spec.input_len},
          {"in_channels", spec.in_channels},  {"embed_dim", spec.embed_dim},
          {"fc_hidden", spec.fc_hidden},      {"hidden_size", spec.hidden_size}};
}

ModelSpec spec_from_json(const nlohmann::json& j, ModelSpec base) {
  for (const auto& [key, value] : j.items()) {
    if (key == "arch") base.arch = parse_arch(value.get<std::string>());
    else if (key == "input_len") base.input_len = value.get<std::size_t>();
    else if (key == "in_channels") base.in_channels = value.get<std::size_t>();
    else if (key == "embed_dim") base.embed_dim = value.get<std::size_t>();
    else if (key == "fc_hidden") base.fc_hidden = value.get<std::size_t>();
    else if (key == "hidden_size") base.hidden_size = value.get<std::size_t>();
    else throw std::invalid_argument("unknown model spec key '" + key + "'");
  }
  return base;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path,
                     const std::string& metadata) {
  Writer w;
  w.put_bytes(std::string_view(kMagic, sizeof(kMagic)));
  w.put<std::uint32_t>(kVersion);
  nlohmann::json header = {{"spec", spec_to_json(model.spec())},
                           {"bn_momentum", model.batchnorm().momentum},
                           {"bn_eps", model.batchnorm().eps}};
  if (!metadata.empty()) {
    try {
      header["meta"] = nlohmann::json::parse(metadata);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("checkpoint metadata is not valid JSON: ") + e.what());
    }
  }
  const std::string text = header.dump();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.put_bytes(text);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.params().size() + 2));
  for (const auto& p : model.params()) w.put_array(p.name, p.value.shape(), p.value.data());
  const auto& bn = model.batchnorm();
  w.put_array("bn.running_mean", {bn.running_mean.size()}, bn.running_mean);
  w.put_array("bn.running_var", {bn.running_var.size()}, bn.running_var);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw FormatError("failed writing checkpoint " + path.string());
}

namespace {

Reader open_checkpoint(const std::filesystem::path& path, nlohmann::json& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}));

  if (r.get_bytes(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw FormatError(path.string() + " is not a checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                      std::to_string(kVersion) + ")");
  }
  try {
    header = nlohmann::json::parse(r.get_bytes(r.get<std::uint32_t>()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  return r;
}

}  // namespace

std::string load_checkpoint_metadata(const std::filesystem::path& path) {
  nlohmann::json header;
  open_checkpoint(path, header);
  return header.contains("meta") ? header["meta"].dump() : std::string();
}

Model load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json header;
  Reader r = open_checkpoint(path, header);
  ModelSpec spec;
  try {
    spec = spec_from_json(header.at("spec"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  Model model = Model::build(spec, 0);
  model.batchnorm().momentum = header.value("bn_momentum", 0.1);
  model.batchnorm().eps = header.value("bn_eps", 1e-5);

  const auto count = r.get<std::uint32_t>();
  if (count != model.params().size() + 2) {
    throw FormatError("checkpoint holds " + std::to_string(count) + " arrays, model needs " +
                      std::to_string(model.params().size() + 2));
  }
  for (auto& p : model.params()) {
    StoredArray a = read_array(r);
    expect_array(a, p.name, p.value.shape());
    std::copy(a.values.begin(), a.values.end(), p.value.data().begin());
  }
  auto& bn = model.batchnorm();
  StoredArray mean = read_array(r);
  expect_array(mean, "bn.running_mean", {bn.running_mean.size()});
  bn.running_mean = std::move(mean.values);
  StoredArray var = read_array(r);
  expect_array(var, "bn.running_var", {bn.running_var.size()});
  bn.running_var = std::move(var.values);
  if (!r.at_end()) throw FormatError("checkpoint has trailing bytes");
  return model;
}

Model load_checkpoint(const std::filesystem::path& path, const ModelSpec& expected) {
  Model m = load_checkpoint(path);
  if (!(m.spec() == expected)) {
    throw FormatError("checkpoint spec " + spec_to_json(m.spec()).dump() +
                      " does not match expected " + spec_to_json(expected).dump());
  }
  return m;
}

}  // namespace dnaembed
