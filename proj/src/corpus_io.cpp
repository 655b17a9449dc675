#include "imgstat/corpus_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <mutex>

#include <opencv2/core.hpp>
#include <opencv2/core/utils/logger.hpp>
#include <opencv2/imgcodecs.hpp>

#include "imgstat/random.hpp"

namespace fs = std::filesystem;

namespace imgstat {

namespace {

void silence_opencv() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    cv::utils::logging::setLogLevel(cv::utils::logging::LOG_LEVEL_SILENT);
  });
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::DecodeError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_suffix_marker(const std::vector<unsigned char>& bytes,
                       std::initializer_list<unsigned char> marker, std::size_t window) {
  const std::size_t m = marker.size();
  if (bytes.size() < m) return false;
  const std::size_t start = bytes.size() > window ? bytes.size() - window : 0;
  auto it = std::search(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end(),
                        marker.begin(), marker.end());
  return it != bytes.end();
}

// Decoders tend to return partially filled rasters for truncated streams;
// require the format's end marker before handing the buffer over.
void check_complete(const std::vector<unsigned char>& b, const fs::path& path) {
  auto fail = [&](const char* why) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + why);
  };
  if (b.size() >= 8 && b[0] == 0x89 && b[1] == 'P' && b[2] == 'N' && b[3] == 'G') {
    if (!has_suffix_marker(b, {'I', 'E', 'N', 'D'}, 64)) fail("truncated PNG (no IEND)");
    return;
  }
  if (b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF) {
    if (!has_suffix_marker(b, {0xFF, 0xD9}, 4096)) fail("truncated JPEG (no EOI)");
    return;
  }
  if (b.size() >= 14 && b[0] == 'B' && b[1] == 'M') {
    const std::uint32_t declared = static_cast<std::uint32_t>(b[2]) | (b[3] << 8) |
                                   (b[4] << 16) | (static_cast<std::uint32_t>(b[5]) << 24);
    if (declared != 0 && declared > b.size()) fail("truncated BMP");
    return;
  }
  fail("unsupported image format");
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void write_bytes_atomically(const fs::path& path, const char* data, std::size_t size) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(data, static_cast<std::streamsize>(size));
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
  }
}

void write_atomically(const fs::path& path, const cv::Mat& mat) {
  std::vector<unsigned char> buf;
  if (!cv::imencode(".png", mat, buf)) {
    throw Error(ErrorCode::IoError, "PNG encode failed for " + path.string());
  }
  write_bytes_atomically(path, reinterpret_cast<const char*>(buf.data()), buf.size());
}

}  // namespace

bool is_supported_image(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

RgbImage load_image(const fs::path& path) {
  silence_opencv();
  const auto bytes = read_bytes(path);
  check_complete(bytes, path);

  cv::Mat mat;
  try {
    mat = cv::imdecode(bytes, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
  }
  if (mat.empty() || mat.type() != CV_8UC3) {
    throw Error(ErrorCode::DecodeError, path.string() + ": decode failed");
  }

  RgbImage img(static_cast<std::size_t>(mat.cols), static_cast<std::size_t>(mat.rows));
  for (int r = 0; r < mat.rows; ++r) {
    const auto* src = mat.ptr<cv::Vec3b>(r);
    auto dst = img.row(static_cast<std::size_t>(r));
    for (int c = 0; c < mat.cols; ++c) {
      dst[static_cast<std::size_t>(c)] = Rgb{src[c][2], src[c][1], src[c][0]};
    }
  }
  return img;
}

RgbImage center_crop(const RgbImage& img, std::size_t size) {
  if (size == 0) throw Error(ErrorCode::BadConfig, "crop size must be positive");
  if (img.width() < size || img.height() < size) {
    throw Error(ErrorCode::TooSmall, "image " + std::to_string(img.width()) + "x" +
                                         std::to_string(img.height()) +
                                         " smaller than crop " + std::to_string(size));
  }
  const std::size_t top = (img.height() - size) / 2;
  const std::size_t left = (img.width() - size) / 2;
  RgbImage out(size, size);
  for (std::size_t r = 0; r < size; ++r) {
    auto src = img.row(top + r).subspan(left, size);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

CorpusManifest scan_corpus(const fs::path& root, std::size_t crop_size,
                           std::optional<std::size_t> limit, std::uint64_t seed) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::IoError, "corpus root is not a directory: " + root.string());
  }

  std::vector<std::string> entries;
  for (auto it = fs::recursive_directory_iterator(root, ec); it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file() && is_supported_image(it->path())) {
      entries.push_back(it->path().lexically_relative(root).generic_string());
    }
  }
  if (entries.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "no images under " + root.string());
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  if (limit && *limit < entries.size()) {
    // Shuffle-prefix: the first `limit` steps of a Fisher-Yates pass.
    Rng rng(seed);
    for (std::size_t i = 0; i < *limit; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(entries.size() - i));
      std::swap(entries[i], entries[j]);
    }
    entries.resize(*limit);
    std::sort(entries.begin(), entries.end());
  }

  CorpusManifest m;
  m.root = root;
  m.entries = std::move(entries);
  m.crop_size = crop_size;
  m.sample_seed = seed;
  m.sample_limit = limit;
  return m;
}

std::string CorpusManifest::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& e : entries) {
    for (unsigned char c : e) mix(c);
    mix(0);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void to_json(nlohmann::json& j, const CorpusManifest& m) {
  j = nlohmann::json{{"root", m.root.generic_string()},
                     {"crop_size", m.crop_size},
                     {"seed", m.sample_seed},
                     {"limit", m.sample_limit ? nlohmann::json(*m.sample_limit) : nlohmann::json()},
                     {"digest", m.digest()},
                     {"entries", m.entries}};
}

void from_json(const nlohmann::json& j, CorpusManifest& m) {
  m.root = j.at("root").get<std::string>();
  m.crop_size = j.at("crop_size").get<std::size_t>();
  m.sample_seed = j.at("seed").get<std::uint64_t>();
  if (j.at("limit").is_null()) {
    m.sample_limit.reset();
  } else {
    m.sample_limit = j.at("limit").get<std::size_t>();
  }
  m.entries = j.at("entries").get<std::vector<std::string>>();
}

void write_text_file(const fs::path& path, std::string_view text) {
  write_bytes_atomically(path, text.data(), text.size());
}

RgbImage gray_to_rgb(const GrayImage& gray) {
  RgbImage out(gray.width(), gray.height());
  auto src = gray.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::clamp(std::floor(src[i] + 0.5), 0.0, 255.0);
    const auto b = static_cast<std::uint8_t>(v);
    dst[i] = Rgb{b, b, b};
  }
  return out;
}

void save_png(const fs::path& path, const RgbImage& img) {
  silence_opencv();
  cv::Mat mat(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
  for (int r = 0; r < mat.rows; ++r) {
    auto* dst = mat.ptr<cv::Vec3b>(r);
    auto src = img.row(static_cast<std::size_t>(r));
    for (int c = 0; c < mat.cols; ++c) {
      const Rgb& p = src[static_cast<std::size_t>(c)];
      dst[c] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  write_atomically(path, mat);
}

void save_png(const fs::path& path, const GrayImage& gray) {
  silence_opencv();
  cv::Mat mat(static_cast<int>(gray.height()), static_cast<int>(gray.width()), CV_8UC1);
  for (int r = 0; r < mat.rows; ++r) {
    auto* dst = mat.ptr<unsigned char>(r);
    auto src = gray.row(static_cast<std::size_t>(r));
    for (int c = 0; c < mat.cols; ++c) {
      dst[c] = static_cast<unsigned char>(
          std::clamp(std::floor(src[static_cast<std::size_t>(c)] + 0.5), 0.0, 255.0));
    }
  }
  write_atomically(path, mat);
}

}  // namespace imgstat
