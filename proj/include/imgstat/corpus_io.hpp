#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "imgstat/image.hpp"

namespace imgstat {

// Ordered, reproducible list of corpus images. Entries are stored relative
// to root in generic (forward-slash) form.
struct CorpusManifest {
  std::filesystem::path root;
  std::vector<std::string> entries;
  std::size_t crop_size = 128;
  std::uint64_t sample_seed = 0;
  std::optional<std::size_t> sample_limit;  // nullopt = unbounded

  std::filesystem::path entry_path(std::size_t i) const { return root / entries.at(i); }

  // FNV-1a over the entry list; used to tie statistics back to a manifest.
  std::string digest() const;

  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

void to_json(nlohmann::json& j, const CorpusManifest& m);
void from_json(const nlohmann::json& j, CorpusManifest& m);

// Decodes PNG, JPEG or BMP to 8-bit RGB. Gray sources are replicated over the
// three channels. Throws Error{DecodeError} on unreadable or truncated files.
RgbImage load_image(const std::filesystem::path& path);

// Top-left corner at (floor((H-size)/2), floor((W-size)/2)).
RgbImage center_crop(const RgbImage& img, std::size_t size);

bool is_supported_image(const std::filesystem::path& path);

CorpusManifest scan_corpus(const std::filesystem::path& root, std::size_t crop_size,
                           std::optional<std::size_t> limit, std::uint64_t seed);

// Lossless 8-bit writers used by the synthetic generators.
void save_png(const std::filesystem::path& path, const RgbImage& img);
void save_png(const std::filesystem::path& path, const GrayImage& gray);

// Writes to "<path>.tmp" then renames over `path`.
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Gray map to RGB by rounding half-up and clamping to [0,255].
RgbImage gray_to_rgb(const GrayImage& gray);

}  // namespace imgstat
