// SPDX-License-Identifier: Apache-2.0
#include "ood/pipeline/archive.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>

namespace ood::pipeline {

namespace {

constexpr std::array<char, 4> kMagic = {'O', 'O', 'D', 'M'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(U)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
    throw ArchiveError(std::string("archive truncated while reading ") + what);
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

std::size_t element_count(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_text(std::span<const std::size_t> shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace

Tensor& ModelArchive::add(std::string name, std::vector<std::size_t> shape,
                          std::span<const float> values) {
  if (element_count(shape) != values.size())
    throw ShapeMismatchError("tensor " + name + ": shape " + shape_text(shape) +
                             " does not match " + std::to_string(values.size()) + " values");
  if (contains(name)) throw ArchiveError("duplicate tensor " + name);
  tensors.push_back({std::move(name), std::move(shape), {values.begin(), values.end()}});
  return tensors.back();
}

bool ModelArchive::contains(std::string_view name) const {
  return std::any_of(tensors.begin(), tensors.end(),
                     [&](const Tensor& t) { return t.name == name; });
}

const Tensor& ModelArchive::get(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw ShapeMismatchError("archive has no tensor " + std::string(name));
}

const Tensor& ModelArchive::get(std::string_view name,
                                std::span<const std::size_t> expected_shape) const {
  const auto& t = get(name);
  if (!std::equal(t.shape.begin(), t.shape.end(), expected_shape.begin(), expected_shape.end()))
    throw ShapeMismatchError("tensor " + std::string(name) + " has shape " +
                             shape_text(t.shape) + ", expected " + shape_text(expected_shape));
  return t;
}

void write_archive(std::ostream& out, const ModelArchive& archive) {
  nlohmann::json manifest = archive.manifest;
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& t : archive.tensors)
    manifest["tensors"].push_back({{"name", t.name}, {"shape", t.shape}});
  const std::string text = manifest.dump(2);

  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, ModelArchive::kVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : archive.tensors)
    for (float v : t.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw ArchiveError("failed to write archive");
}

ModelArchive read_archive(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw BadMagicError("not a model archive (bad magic bytes)");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != ModelArchive::kVersion)
    throw VersionMismatchError("archive format version " + std::to_string(version) +
                               " is not supported (expected " +
                               std::to_string(ModelArchive::kVersion) + ")");
  const auto length = get_le<std::uint64_t>(in, "manifest length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length)))
    throw ShapeMismatchError("archive truncated inside the manifest");

  ModelArchive archive;
  try {
    archive.manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError(std::string("malformed archive manifest: ") + e.what());
  }
  if (!archive.manifest.contains("tensors") || !archive.manifest["tensors"].is_array())
    throw ArchiveError("archive manifest lacks a tensor list");

  for (const auto& entry : archive.manifest["tensors"]) {
    Tensor t;
    try {
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
      throw ArchiveError(std::string("malformed tensor entry: ") + e.what());
    }
    const std::size_t n = element_count(t.shape);
    t.values.resize(n);
    std::vector<unsigned char> raw(4 * n);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw ShapeMismatchError("payload truncated in tensor " + t.name + " (declared shape " +
                               shape_text(t.shape) + ")");
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      for (std::size_t b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[4 * i + b]) << (8 * b);
      t.values[i] = std::bit_cast<float>(bits);
    }
    archive.tensors.push_back(std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw ShapeMismatchError("payload longer than the declared tensor shapes");
  archive.manifest.erase("tensors");
  return archive;
}

void save_archive(const std::filesystem::path& path, const ModelArchive& archive) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArchiveError("cannot open " + tmp.string() + " for writing");
    write_archive(out, archive);
  }
  std::filesystem::rename(tmp, path);
}

ModelArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("cannot open archive " + path.string());
  return read_archive(in);
}

}  // namespace ood::pipeline
