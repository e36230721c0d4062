#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wder/nn/adam.hpp"
#include "wder/nn/policy.hpp"

namespace wder::nn {

/// Binary checkpoint:
///   bytes 0..7   magic "WDERCKPT"
///   bytes 8..15  header length L (uint64, little-endian)
///   next L bytes UTF-8 JSON header; `arrays` lists {name, count} in order
///   remainder    the arrays, back to back, as little-endian float64
struct Checkpoint {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::pair<std::string, Eigen::VectorXd>> arrays;

  void add(const std::string& name, const Eigen::VectorXd& values);
  const Eigen::VectorXd& get(const std::string& name) const;
  bool has(const std::string& name) const;

  void write(const std::filesystem::path& path) const;
  static Checkpoint read(const std::filesystem::path& path);
};

/// Network description stored alongside the parameters.
nlohmann::json describe(const PolicyNet& net);
nlohmann::json describe(const ValueNet& net);

void save_policy(Checkpoint& ck, const std::string& prefix,
                 const PolicyNet& net);
void load_policy(const Checkpoint& ck, const std::string& prefix,
                 PolicyNet& net);
void save_value(Checkpoint& ck, const std::string& prefix, const ValueNet& net);
void load_value(const Checkpoint& ck, const std::string& prefix, ValueNet& net);
void save_opt(Checkpoint& ck, const std::string& prefix, const OptState& s);
void load_opt(const Checkpoint& ck, const std::string& prefix, OptState& s);

}  // namespace wder::nn
