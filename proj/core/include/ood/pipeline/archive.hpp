// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ood::pipeline {

class ArchiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagicError : public ArchiveError {
 public:
  using ArchiveError::ArchiveError;
};
class VersionMismatchError : public ArchiveError {
 public:
  using ArchiveError::ArchiveError;
};
class ShapeMismatchError : public ArchiveError {
 public:
  using ArchiveError::ArchiveError;
};

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;  // row-major, product(shape) entries
};

/// On-disk model file:
///   bytes 0..3   "OODM"
///   uint32 LE    format version (1)
///   uint64 LE    manifest length in bytes
///   manifest     JSON text; "tensors" lists name and shape in payload order
///   payload      float32 LE values of every tensor, concatenated
struct ModelArchive {
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json manifest = nlohmann::json::object();
  std::vector<Tensor> tensors;

  Tensor& add(std::string name, std::vector<std::size_t> shape, std::span<const float> values);
  /// Throws ShapeMismatchError when the tensor is missing or its shape differs.
  const Tensor& get(std::string_view name, std::span<const std::size_t> expected_shape) const;
  const Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;
};

void write_archive(std::ostream& out, const ModelArchive& archive);
ModelArchive read_archive(std::istream& in);

/// Writes through a sibling temporary file so a failed save leaves no
/// partial archive behind.
void save_archive(const std::filesystem::path& path, const ModelArchive& archive);
ModelArchive load_archive(const std::filesystem::path& path);

}  // namespace ood::pipeline
