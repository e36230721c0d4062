#include "wder/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "wder/errors.hpp"

namespace wder::nn {

namespace {

constexpr char kMagic[8] = {'W', 'D', 'E', 'R', 'C', 'K', 'P', 'T'};

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw IoError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  put_u64(os, std::bit_cast<std::uint64_t>(d));
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace

void Checkpoint::add(const std::string& name, const Eigen::VectorXd& values) {
  if (has(name)) throw UsageError("checkpoint: duplicate array '" + name + "'");
  arrays.emplace_back(name, values);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, v] : arrays)
    if (n == name) return true;
  return false;
}

const Eigen::VectorXd& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, v] : arrays)
    if (n == name) return v;
  throw IoError("checkpoint: missing array '" + name + "'");
}

void Checkpoint::write(const std::filesystem::path& path) const {
  nlohmann::json h = header;
  h["arrays"] = nlohmann::json::array();
  for (const auto& [n, v] : arrays)
    h["arrays"].push_back({{"name", n}, {"count", v.size()}});
  const std::string text = h.dump();

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("checkpoint: cannot open " + tmp);
    os.write(kMagic, 8);
    put_u64(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [n, v] : arrays)
      for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(os, v(i));
    if (!os) throw IoError("checkpoint: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("checkpoint: bad magic in " + path.string());
  const auto len = get_u64(is);
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len)))
    throw IoError("checkpoint: truncated header");
  Checkpoint ck;
  ck.header = nlohmann::json::parse(text);
  for (const auto& a : ck.header.at("arrays")) {
    Eigen::VectorXd v(a.at("count").get<Eigen::Index>());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get_f64(is);
    ck.arrays.emplace_back(a.at("name").get<std::string>(), std::move(v));
  }
  ck.header.erase("arrays");
  return ck;
}

nlohmann::json describe(const PolicyNet& net) {
  return {{"head", to_string(net.head())},
          {"layers", net.layout().sizes()},
          {"obs_dim", net.obs_dim()},
          {"action_dim", net.action_dim()},
          {"param_count", net.param_count()}};
}

nlohmann::json describe(const ValueNet& net) {
  return {{"layers", net.layout().sizes()},
          {"param_count", net.param_count()}};
}

void save_policy(Checkpoint& ck, const std::string& prefix,
                 const PolicyNet& net) {
  ck.add(prefix + ".params", net.params());
}

void load_policy(const Checkpoint& ck, const std::string& prefix,
                 PolicyNet& net) {
  const auto& v = ck.get(prefix + ".params");
  if (v.size() != net.param_count())
    throw ConfigError("checkpoint: '" + prefix + "' has " +
                      std::to_string(v.size()) + " parameters, network expects " +
                      std::to_string(net.param_count()));
  net.mutable_params() = v;
}

void save_value(Checkpoint& ck, const std::string& prefix, const ValueNet& net) {
  ck.add(prefix + ".params", net.params());
}

void load_value(const Checkpoint& ck, const std::string& prefix,
                ValueNet& net) {
  const auto& v = ck.get(prefix + ".params");
  if (v.size() != net.param_count())
    throw ConfigError("checkpoint: '" + prefix + "' parameter count mismatch");
  net.mutable_params() = v;
}

void save_opt(Checkpoint& ck, const std::string& prefix, const OptState& s) {
  ck.add(prefix + ".m", s.m);
  ck.add(prefix + ".v", s.v);
  Eigen::VectorXd meta(2);
  meta << double(s.step), s.lr;
  ck.add(prefix + ".meta", meta);
}

void load_opt(const Checkpoint& ck, const std::string& prefix, OptState& s) {
  s.m = ck.get(prefix + ".m");
  s.v = ck.get(prefix + ".v");
  const auto& meta = ck.get(prefix + ".meta");
  s.step = static_cast<long>(meta(0));
  s.lr = meta(1);
}

}  // namespace wder::nn
