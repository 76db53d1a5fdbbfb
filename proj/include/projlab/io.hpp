#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "projlab/image.hpp"

// PPM: P6 (binary) and P3 (ASCII), maxval 255 only. Writers always emit the
// canonical P6 header "P6\n<w> <h>\n255\n". PFM: color "PF" header with a
// negative scale (little-endian floats), rows stored bottom-to-top.
// See docs/formats.md.

namespace projlab {

namespace detail {

inline std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_all(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::Io, "short write to " + path.string());
}

/// Header token reader for netpbm-style files (whitespace separated, '#'
/// comments to end of line).
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& buf) : buf_(buf) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < buf_.size() && !std::isspace(static_cast<unsigned char>(buf_[pos_]))) ++pos_;
    require(pos_ > start, ErrorCode::MalformedHeader, "unexpected end of header");
    return buf_.substr(start, pos_ - start);
  }

  long integer() {
    const std::string t = token();
    for (char ch : t)
      require(std::isdigit(static_cast<unsigned char>(ch)) != 0, ErrorCode::MalformedHeader,
              "expected integer, got '" + t + "'");
    require(t.size() <= 9, ErrorCode::MalformedHeader, "integer too large");
    return std::stol(t);
  }

  /// Consumes the single whitespace byte that separates the header from a
  /// binary payload.
  void single_whitespace() {
    require(pos_ < buf_.size() && std::isspace(static_cast<unsigned char>(buf_[pos_])),
            ErrorCode::MalformedHeader, "missing whitespace after header");
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < buf_.size()) {
      if (std::isspace(static_cast<unsigned char>(buf_[pos_]))) {
        ++pos_;
      } else if (buf_[pos_] == '#') {
        while (pos_ < buf_.size() && buf_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& buf_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Image decode_ppm(const std::string& buf) {
  detail::HeaderReader hr(buf);
  const std::string magic = hr.token();
  require(magic == "P6" || magic == "P3", ErrorCode::MalformedHeader,
          "unsupported magic '" + magic + "'");
  const long w = hr.integer();
  const long h = hr.integer();
  const long maxval = hr.integer();
  require(w > 0 && h > 0, ErrorCode::MalformedHeader, "dimensions must be positive");
  require(maxval == 255, ErrorCode::MalformedHeader, "only maxval 255 is supported");
  const std::size_t n = static_cast<std::size_t>(w) * h * 3;
  std::vector<float> data(n);
  if (magic == "P6") {
    hr.single_whitespace();
    const std::size_t off = hr.position();
    require(buf.size() - off >= n, ErrorCode::TruncatedData,
            "expected " + std::to_string(n) + " bytes of pixel data");
    for (std::size_t i = 0; i < n; ++i)
      data[i] = static_cast<float>(static_cast<unsigned char>(buf[off + i])) / 255.0f;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      long v = 0;
      try {
        v = hr.integer();
      } catch (const Error& e) {
        fail(ErrorCode::TruncatedData, std::string("P3 sample ") + std::to_string(i) + ": " + e.what());
      }
      require(v <= 255, ErrorCode::MalformedHeader, "sample exceeds maxval");
      data[i] = static_cast<float>(v) / 255.0f;
    }
  }
  return Image::from_data(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

inline std::string encode_ppm(const Image& img) {
  const QuantizedImage q = quantize(img);
  std::string out = "P6\n" + std::to_string(q.width) + " " + std::to_string(q.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(q.data.data()), q.data.size());
  return out;
}

inline std::string encode_ppm_ascii(const Image& img) {
  const QuantizedImage q = quantize(img);
  std::ostringstream ss;
  ss << "P3\n" << q.width << ' ' << q.height << "\n255\n";
  for (int y = 0; y < q.height; ++y) {
    for (int x = 0; x < q.width; ++x) {
      for (int c = 0; c < 3; ++c) ss << (x || c ? " " : "") << static_cast<int>(q.at(x, y, c));
    }
    ss << '\n';
  }
  return ss.str();
}

inline Image read_ppm(const std::filesystem::path& path) { return decode_ppm(detail::read_all(path)); }

inline void write_ppm(const std::filesystem::path& path, const Image& img) {
  detail::write_all(path, encode_ppm(img));
}

inline std::string encode_pfm(const Image& img) {
  std::string out =
      "PF\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n-1.0\n";
  out.reserve(out.size() + img.data().size() * 4);
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(img.at(x, y, c));
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
        char b[4];
        std::memcpy(b, &bits, 4);
        out.append(b, 4);
      }
    }
  }
  return out;
}

inline Image decode_pfm(const std::string& buf) {
  detail::HeaderReader hr(buf);
  const std::string magic = hr.token();
  require(magic == "PF", ErrorCode::MalformedHeader, "unsupported magic '" + magic + "'");
  const long w = hr.integer();
  const long h = hr.integer();
  const std::string scale_tok = hr.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (...) {
    fail(ErrorCode::MalformedHeader, "bad scale '" + scale_tok + "'");
  }
  require(w > 0 && h > 0, ErrorCode::MalformedHeader, "dimensions must be positive");
  require(scale < 0.0, ErrorCode::MalformedHeader, "only little-endian (negative scale) PFM is supported");
  hr.single_whitespace();
  const std::size_t off = hr.position();
  const std::size_t n = static_cast<std::size_t>(w) * h * 3;
  require(buf.size() - off >= n * 4, ErrorCode::TruncatedData, "PFM payload too short");
  std::vector<float> data(n);
  for (long y = 0; y < h; ++y) {
    const long row = h - 1 - y;
    for (long i = 0; i < w * 3; ++i) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, buf.data() + off + (static_cast<std::size_t>(y) * w * 3 + i) * 4, 4);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      data[static_cast<std::size_t>(row) * w * 3 + i] = std::bit_cast<float>(bits);
    }
  }
  return Image::from_data(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

inline Image read_pfm(const std::filesystem::path& path) { return decode_pfm(detail::read_all(path)); }

inline void write_pfm(const std::filesystem::path& path, const Image& img) {
  detail::write_all(path, encode_pfm(img));
}

}  // namespace projlab
