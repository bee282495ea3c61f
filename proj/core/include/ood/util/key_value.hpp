// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ood::util {

/// Raised for malformed configuration files and invalid settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration. Blank lines and lines starting with `#`
/// are ignored; duplicate keys are rejected.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, std::string_view source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  std::string get(std::string_view key, std::string_view fallback) const;
  std::string require(std::string_view key) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  double get_double(std::string_view key, double fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

  /// Throws ConfigError naming the first key not in `known`.
  void reject_unknown(const std::set<std::string, std::less<>>& known) const;

  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

 private:
  std::string source_;
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace ood::util
