// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <mutex>

#include "ood/util/key_value.hpp"
#include "ood/util/log.hpp"

namespace ood::util {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::atomic<LogLevel> g_level{LogLevel::warning};
std::mutex g_log_mutex;

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, std::string_view source) {
  KeyValueConfig config;
  config.source_ = std::string(source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(config.source_ + ":" + std::to_string(line_no) +
                        ": expected key=value");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key.empty())
      throw ConfigError(config.source_ + ":" + std::to_string(line_no) + ": empty key");
    if (!config.values_.emplace(std::string(key), std::string(value)).second)
      throw ConfigError(config.source_ + ":" + std::to_string(line_no) +
                        ": duplicate key '" + std::string(key) + "'");
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse(in, path.string());
}

bool KeyValueConfig::has(std::string_view key) const { return values_.contains(key); }

std::string KeyValueConfig::get(std::string_view key, std::string_view fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? std::string(fallback) : it->second;
}

std::string KeyValueConfig::require(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(source_ + ": missing required key '" + std::string(key) + "'");
  return it->second;
}

namespace {

template <typename T>
T parse_number(std::string_view key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("invalid numeric value for '" + std::string(key) + "': " + text);
  return value;
}

}  // namespace

std::int64_t KeyValueConfig::get_int(std::string_view key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::int64_t>(key, it->second);
}

std::uint64_t KeyValueConfig::get_u64(std::string_view key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& v = it->second;
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("invalid boolean for '" + std::string(key) + "': " + v);
}

void KeyValueConfig::reject_unknown(const std::set<std::string, std::less<>>& known) const {
  for (const auto& [key, value] : values_)
    if (!known.contains(key)) throw ConfigError(source_ + ": unknown key '" + key + "'");
}

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void log(LogLevel level, std::string_view message) {
  if (level < g_level.load()) return;
  static constexpr const char* kNames[] = {"debug", "info", "warning", "error"};
  std::lock_guard lock(g_log_mutex);
  std::clog << "[" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace ood::util
