// Copyright 2026 The pgmkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Readers and writers for the grid, mask and annotation formats:
//
//   * Netpbm P5 (maxval 1..65535, 16-bit samples big-endian) for masks and
//     intensity images. Samples are scaled by 1/maxval on read.
//   * PFM "Pf" single-channel float32, rows stored bottom-to-top on disk.
//     Written little-endian with scale -1.0; both byte orders are accepted on
//     read. Values are held as double in memory, so write -> read -> write
//     reproduces the file byte for byte.
//   * Uncompressed run-length masks: column-major, counts alternate
//     background/foreground starting with background.
//   * Annotation JSON:
//       {"images": [{"id": int, "width": int, "height": int}, ...],
//        "annotations": [{"image_id": int, "category_id": int,
//                         "rle": [int, ...] | "mask_file": string,
//                         "score": float /* predictions only */}, ...]}
//     mask_file paths are resolved relative to the JSON file's directory.

#ifndef PGMKIT_MASK_IO_HPP_
#define PGMKIT_MASK_IO_HPP_

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pgmkit/errors.hpp"
#include "pgmkit/grid.hpp"

namespace pgmkit {

enum class GridFormat {
  kNetpbmGray,    // P5, 8- or 16-bit; read only
  kNetpbmGray16,  // P5, maxval 65535; write
  kPfmFloat,      // Pf, float32
};

struct BoundingBox {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t w = 0;
  std::size_t h = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Tight box around the foreground; (0, 0, 0, 0) for an empty mask.
inline BoundingBox tight_bbox(const BinaryMask& m) {
  std::size_t x0 = m.width(), y0 = m.height(), x1 = 0, y1 = 0;
  bool any = false;
  for (std::size_t y = 0; y < m.height(); ++y) {
    for (std::size_t x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      any = true;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (!any) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

/// Ground-truth instance. Area and bbox are derived from the mask.
class InstanceAnnotation {
 public:
  InstanceAnnotation(std::int64_t category_id, BinaryMask mask)
      : category_id_(category_id), mask_(std::move(mask)) {
    if (category_id_ < 0) throw DomainError("category_id must be non-negative");
    area_ = mask_.count();
    bbox_ = tight_bbox(mask_);
  }

  std::int64_t category_id() const noexcept { return category_id_; }
  const BinaryMask& mask() const noexcept { return mask_; }
  std::size_t area() const noexcept { return area_; }
  const BoundingBox& bbox() const noexcept { return bbox_; }

 private:
  std::int64_t category_id_;
  BinaryMask mask_;
  std::size_t area_ = 0;
  BoundingBox bbox_;
};

/// Predicted instance with a confidence score in [0, 1].
class Detection {
 public:
  Detection(std::int64_t category_id, double score, BinaryMask mask)
      : category_id_(category_id), score_(score), mask_(std::move(mask)) {
    if (category_id_ < 0) throw DomainError("category_id must be non-negative");
    if (!std::isfinite(score_) || score_ < 0.0 || score_ > 1.0) {
      throw RangeError("detection score " + std::to_string(score_) +
                       " outside [0, 1]");
    }
    area_ = mask_.count();
  }

  std::int64_t category_id() const noexcept { return category_id_; }
  double score() const noexcept { return score_; }
  const BinaryMask& mask() const noexcept { return mask_; }
  std::size_t area() const noexcept { return area_; }

 private:
  std::int64_t category_id_;
  double score_;
  BinaryMask mask_;
  std::size_t area_ = 0;
};

namespace io_detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

// Cursor over a Netpbm/PFM header. Tokens are separated by whitespace; '#'
// starts a comment running to end of line (Netpbm only).
class HeaderCursor {
 public:
  HeaderCursor(std::string_view bytes, bool allow_comments)
      : bytes_(bytes), comments_(allow_comments) {}

  std::size_t offset() const noexcept { return pos_; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (comments_ && c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r')
          ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() &&
           !std::isspace(static_cast<unsigned char>(bytes_[pos_])) &&
           !(comments_ && bytes_[pos_] == '#'))
      ++pos_;
    if (start == pos_) throw ParseError("unexpected end of header", start);
    return bytes_.substr(start, pos_ - start);
  }

  std::size_t unsigned_field(const char* name, std::size_t max_value) {
    skip_space();
    const std::size_t at = pos_;
    const auto tok = token();
    std::size_t v = 0;
    for (char c : tok) {
      if (c < '0' || c > '9')
        throw ParseError(std::string("invalid ") + name, at);
      v = v * 10 + static_cast<std::size_t>(c - '0');
      if (v > max_value) throw ParseError(std::string(name) + " too large", at);
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t end_of_header() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      throw ParseError("missing whitespace after header", pos_);
    return pos_ + 1;
  }

 private:
  std::string_view bytes_;
  bool comments_;
  std::size_t pos_ = 0;
};

constexpr std::size_t kMaxDimension = 1u << 20;

inline RealGrid parse_netpbm(std::string_view bytes) {
  HeaderCursor cur(bytes, /*allow_comments=*/true);
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5")
    throw ParseError("not a binary graymap (expected P5 magic)", 0);
  cur.token();
  const std::size_t width = cur.unsigned_field("width", kMaxDimension);
  const std::size_t height = cur.unsigned_field("height", kMaxDimension);
  const std::size_t maxval_at = (cur.skip_space(), cur.offset());
  const std::size_t maxval = cur.unsigned_field("maxval", 65535);
  if (maxval == 0) throw ParseError("maxval must be positive", maxval_at);
  if (width == 0 || height == 0) throw ParseError("empty image", maxval_at);
  const std::size_t data = cur.end_of_header();
  const std::size_t bps = maxval < 256 ? 1 : 2;
  const std::size_t need = width * height * bps;
  if (bytes.size() - data < need)
    throw ParseError("truncated raster: expected " + std::to_string(need) +
                         " bytes",
                     bytes.size());
  std::vector<double> values(width * height);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + data);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const unsigned sample = bps == 1 ? p[i] : (unsigned(p[2 * i]) << 8) | p[2 * i + 1];
    if (sample > maxval)
      throw ParseError("sample exceeds maxval", data + i * bps);
    values[i] = static_cast<double>(sample) / static_cast<double>(maxval);
  }
  return RealGrid(width, height, std::move(values));
}

inline RealGrid parse_pfm(std::string_view bytes) {
  HeaderCursor cur(bytes, /*allow_comments=*/false);
  if (bytes.size() < 2 || bytes.substr(0, 2) != "Pf") {
    if (bytes.size() >= 2 && bytes.substr(0, 2) == "PF")
      throw ParseError("colour PFM not supported", 0);
    throw ParseError("not a grayscale PFM (expected Pf magic)", 0);
  }
  cur.token();
  const std::size_t width = cur.unsigned_field("width", kMaxDimension);
  const std::size_t height = cur.unsigned_field("height", kMaxDimension);
  cur.skip_space();
  const std::size_t scale_at = cur.offset();
  const std::string scale_tok(cur.token());
  double scale = 0.0;
  {
    std::istringstream ss(scale_tok);
    ss.imbue(std::locale::classic());
    if (!(ss >> scale) || !ss.eof() || scale == 0.0 || !std::isfinite(scale))
      throw ParseError("invalid PFM scale", scale_at);
  }
  if (width == 0 || height == 0) throw ParseError("empty image", scale_at);
  const bool little = scale < 0.0;
  const std::size_t data = cur.end_of_header();
  const std::size_t need = width * height * 4;
  if (bytes.size() - data < need)
    throw ParseError("truncated raster: expected " + std::to_string(need) +
                         " bytes",
                     bytes.size());
  std::vector<double> values(width * height);
  const char* p = bytes.data() + data;
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t y = height - 1 - row;  // disk rows run bottom-to-top
    for (std::size_t x = 0; x < width; ++x) {
      std::uint32_t raw;
      std::memcpy(&raw, p + 4 * (row * width + x), 4);
      const bool swap = little != (std::endian::native == std::endian::little);
      if (swap) raw = __builtin_bswap32(raw);
      values[y * width + x] = static_cast<double>(std::bit_cast<float>(raw));
    }
  }
  return RealGrid(width, height, std::move(values));
}

}  // namespace io_detail

/// Parses a grid of unrestricted real values. Netpbm samples are scaled to
/// [0, 1]; PFM samples are returned as stored.
inline RealGrid parse_real_grid(std::string_view bytes, GridFormat format) {
  switch (format) {
    case GridFormat::kNetpbmGray:
    case GridFormat::kNetpbmGray16:
      return io_detail::parse_netpbm(bytes);
    case GridFormat::kPfmFloat:
      return io_detail::parse_pfm(bytes);
  }
  throw DomainError("unknown grid format");
}

inline RealGrid read_real_grid(const std::filesystem::path& path, GridFormat format) {
  return parse_real_grid(io_detail::read_file(path), format);
}

/// Reads a luminance grid. PFM samples outside [0, 1] or non-finite raise
/// RangeError.
inline LuminanceGrid read_grid(const std::filesystem::path& path, GridFormat format) {
  return LuminanceGrid(read_real_grid(path, format));
}

/// Infers the format from the extension: .pfm -> PFM, anything else Netpbm.
inline GridFormat format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".pfm" ? GridFormat::kPfmFloat : GridFormat::kNetpbmGray;
}

/// Reads a P5 file (or PFM) as a mask: any positive sample is foreground.
inline BinaryMask read_mask(const std::filesystem::path& path) {
  const RealGrid g = read_real_grid(path, format_for_path(path));
  std::vector<std::uint8_t> bits(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) bits[i] = g.values()[i] > 0.0;
  return BinaryMask(g.width(), g.height(), std::move(bits));
}

/// Serializes any width()/height()/values() grid.
template <typename G>
std::string serialize_grid(const G& grid, GridFormat format) {
  const std::size_t w = grid.width(), h = grid.height();
  const auto values = grid.values();
  std::string out;
  switch (format) {
    case GridFormat::kNetpbmGray:
    case GridFormat::kNetpbmGray16: {
      for (double v : values) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
          throw RangeError("value " + std::to_string(v) +
                           " outside [0, 1]; normalize before writing gray16");
      }
      out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
      out.reserve(out.size() + 2 * values.size());
      for (double v : values) {
        const auto s = static_cast<std::uint16_t>(std::lround(v * 65535.0));
        out.push_back(static_cast<char>(s >> 8));
        out.push_back(static_cast<char>(s & 0xff));
      }
      return out;
    }
    case GridFormat::kPfmFloat: {
      out = "Pf\n" + std::to_string(w) + " " + std::to_string(h) + "\n-1.0\n";
      const std::size_t header = out.size();
      out.resize(header + 4 * values.size());
      char* p = out.data() + header;
      for (std::size_t row = 0; row < h; ++row) {
        const std::size_t y = h - 1 - row;
        for (std::size_t x = 0; x < w; ++x) {
          auto raw = std::bit_cast<std::uint32_t>(static_cast<float>(values[y * w + x]));
          if constexpr (std::endian::native == std::endian::big)
            raw = __builtin_bswap32(raw);
          std::memcpy(p + 4 * (row * w + x), &raw, 4);
        }
      }
      return out;
    }
  }
  throw DomainError("unknown grid format");
}

template <typename G>
void write_grid(const G& grid, const std::filesystem::path& path, GridFormat format) {
  io_detail::write_file(path, serialize_grid(grid, format));
}

/// Column-major, background-first run lengths.
inline BinaryMask decode_rle(std::span<const std::uint64_t> counts,
                             std::size_t height, std::size_t width) {
  std::uint64_t total = 0;
  for (auto c : counts) {
    if (c > std::numeric_limits<std::uint64_t>::max() - total)
      throw ParseError("RLE counts overflow");
    total += c;
  }
  if (total != static_cast<std::uint64_t>(height) * width) {
    throw ParseError("RLE counts sum to " + std::to_string(total) +
                     ", expected " + std::to_string(height * width));
  }
  BinaryMask m(width, height);
  std::size_t i = 0;
  for (std::size_t run = 0; run < counts.size(); ++run) {
    const bool fg = run % 2 == 1;
    for (std::uint64_t k = 0; k < counts[run]; ++k, ++i) {
      if (fg) m.set(i / height, i % height, true);
    }
  }
  return m;
}

inline std::vector<std::uint64_t> encode_rle(const BinaryMask& m) {
  std::vector<std::uint64_t> counts;
  bool current = false;
  std::uint64_t run = 0;
  for (std::size_t x = 0; x < m.width(); ++x) {
    for (std::size_t y = 0; y < m.height(); ++y) {
      if (m(x, y) != current) {
        counts.push_back(run);
        run = 0;
        current = !current;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

enum class RecordKind { kGroundTruth, kPrediction };

/// All records of one image. Only the vector matching the requested
/// RecordKind is populated.
struct AnnotatedImage {
  std::int64_t image_id = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<InstanceAnnotation> instances;
  std::vector<Detection> detections;
};

namespace io_detail {

inline std::int64_t require_int(const nlohmann::json& obj, const char* key,
                                const char* where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer())
    throw SchemaError(std::string(where) + ": missing integer field \"" + key + "\"");
  return it->get<std::int64_t>();
}

}  // namespace io_detail

/// Parses annotation JSON text. `base_dir` resolves relative mask_file paths.
inline std::vector<AnnotatedImage> parse_annotations(
    std::string_view text, RecordKind kind,
    const std::filesystem::path& base_dir = {}) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("annotation JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw SchemaError("annotation JSON: top level must be an object");

  std::vector<AnnotatedImage> images;
  std::map<std::int64_t, std::size_t> index;
  if (auto it = doc.find("images"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("\"images\" must be an array");
    for (const auto& rec : *it) {
      if (!rec.is_object()) throw SchemaError("image record must be an object");
      AnnotatedImage img;
      img.image_id = io_detail::require_int(rec, "id", "image");
      const auto w = io_detail::require_int(rec, "width", "image");
      const auto h = io_detail::require_int(rec, "height", "image");
      if (w <= 0 || h <= 0) throw SchemaError("image dimensions must be positive");
      img.width = static_cast<std::size_t>(w);
      img.height = static_cast<std::size_t>(h);
      if (!index.emplace(img.image_id, images.size()).second)
        throw SchemaError("duplicate image id " + std::to_string(img.image_id));
      images.push_back(std::move(img));
    }
  }

  auto it = doc.find("annotations");
  if (it == doc.end()) return images;
  if (!it->is_array()) throw SchemaError("\"annotations\" must be an array");
  for (const auto& rec : *it) {
    if (!rec.is_object()) throw SchemaError("annotation record must be an object");
    const auto image_id = io_detail::require_int(rec, "image_id", "annotation");
    const auto category = io_detail::require_int(rec, "category_id", "annotation");
    if (category < 0) throw SchemaError("category_id must be non-negative");
    auto img_it = index.find(image_id);
    if (img_it == index.end())
      throw SchemaError("annotation refers to unknown image " + std::to_string(image_id));
    AnnotatedImage& img = images[img_it->second];

    const bool has_rle = rec.contains("rle");
    const bool has_file = rec.contains("mask_file");
    if (has_rle == has_file)
      throw ParseError("annotation must carry exactly one of \"rle\" or \"mask_file\"");
    BinaryMask mask;
    if (has_rle) {
      const auto& arr = rec["rle"];
      if (!arr.is_array()) throw ParseError("\"rle\" must be an array of counts");
      std::vector<std::uint64_t> counts;
      counts.reserve(arr.size());
      for (const auto& c : arr) {
        if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0))
          throw ParseError("RLE counts must be non-negative integers");
        counts.push_back(c.get<std::uint64_t>());
      }
      mask = decode_rle(counts, img.height, img.width);
    } else {
      if (!rec["mask_file"].is_string()) throw ParseError("\"mask_file\" must be a string");
      std::filesystem::path p = rec["mask_file"].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      mask = read_mask(p);
      if (mask.width() != img.width || mask.height() != img.height)
        throw SchemaError("mask file " + p.string() + " does not match image size");
    }

    if (kind == RecordKind::kGroundTruth) {
      img.instances.emplace_back(category, std::move(mask));
    } else {
      auto s = rec.find("score");
      if (s == rec.end()) throw SchemaError("prediction record without \"score\"");
      if (!s->is_number()) throw SchemaError("\"score\" must be a number");
      img.detections.emplace_back(category, s->get<double>(), std::move(mask));
    }
  }
  return images;
}

inline std::vector<AnnotatedImage> load_annotations(const std::filesystem::path& path,
                                                    RecordKind kind) {
  return parse_annotations(io_detail::read_file(path), kind, path.parent_path());
}

}  // namespace pgmkit

#endif  // PGMKIT_MASK_IO_HPP_
