#pragma once

// Binary model container. Layout (all integers u32 little-endian):
//   "PLAB" magic, version, kind string, section count, then per section:
//   name string, type (0 = f64 array, 1 = UTF-8 text), then for arrays the
//   rank, each dimension, and the values as little-endian IEEE-754 doubles;
//   for text the byte length and the bytes. Strings are length-prefixed.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "projlab/error.hpp"

namespace projlab {

inline constexpr char kContainerMagic[4] = {'P', 'L', 'A', 'B'};
inline constexpr std::uint32_t kContainerVersion = 1;

struct ContainerArray {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

struct Container {
  std::string kind;
  std::map<std::string, ContainerArray> arrays;
  std::map<std::string, std::string> texts;

  void put(const std::string& name, std::vector<double> values, std::vector<std::uint32_t> dims = {}) {
    if (dims.empty()) dims = {static_cast<std::uint32_t>(values.size())};
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    require(n == values.size(), ErrorCode::DimensionMismatch, "container array dims do not match value count");
    arrays[name] = {std::move(dims), std::move(values)};
  }
  void put_scalar(const std::string& name, double v) { put(name, {v}); }
  void put_text(const std::string& name, std::string v) { texts[name] = std::move(v); }

  const ContainerArray& array(const std::string& name) const {
    const auto it = arrays.find(name);
    require(it != arrays.end(), ErrorCode::MalformedHeader, "container is missing array '" + name + "'");
    return it->second;
  }
  double scalar(const std::string& name) const {
    const ContainerArray& a = array(name);
    require(a.values.size() == 1, ErrorCode::MalformedHeader, "container entry '" + name + "' is not a scalar");
    return a.values[0];
  }
  const std::string& text(const std::string& name) const {
    const auto it = texts.find(name);
    require(it != texts.end(), ErrorCode::MalformedHeader, "container is missing text '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

inline void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : b_(bytes) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    require(b_.size() - pos_ >= n, ErrorCode::TruncatedData, "container data ends early");
  }
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_container(const Container& c) {
  std::string out(kContainerMagic, 4);
  detail::put_u32(out, kContainerVersion);
  detail::put_str(out, c.kind);
  detail::put_u32(out, static_cast<std::uint32_t>(c.arrays.size() + c.texts.size()));
  for (const auto& [name, a] : c.arrays) {
    detail::put_str(out, name);
    detail::put_u32(out, 0);
    detail::put_u32(out, static_cast<std::uint32_t>(a.dims.size()));
    for (auto d : a.dims) detail::put_u32(out, d);
    for (double v : a.values) detail::put_f64(out, v);
  }
  for (const auto& [name, t] : c.texts) {
    detail::put_str(out, name);
    detail::put_u32(out, 1);
    detail::put_str(out, t);
  }
  return out;
}

inline Container decode_container(const std::string& bytes) {
  detail::ByteReader r(bytes);
  require(r.raw(4) == std::string(kContainerMagic, 4), ErrorCode::MalformedHeader, "bad container magic");
  require(r.u32() == kContainerVersion, ErrorCode::MalformedHeader, "unsupported container version");
  Container c;
  c.kind = r.str();
  const std::uint32_t sections = r.u32();
  for (std::uint32_t s = 0; s < sections; ++s) {
    std::string name = r.str();
    const std::uint32_t type = r.u32();
    if (type == 1) {
      c.texts[name] = r.str();
      continue;
    }
    require(type == 0, ErrorCode::MalformedHeader, "unknown container section type");
    ContainerArray a;
    const std::uint32_t rank = r.u32();
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      a.dims.push_back(r.u32());
      n *= a.dims.back();
    }
    require(n <= bytes.size() / 8, ErrorCode::TruncatedData, "container array larger than file");
    a.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) a.values.push_back(r.f64());
    c.arrays[name] = std::move(a);
  }
  require(r.done(), ErrorCode::MalformedHeader, "trailing bytes after container");
  return c;
}

inline void write_container(const std::string& path, const Container& c) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open " + path + " for writing");
  const std::string bytes = encode_container(c);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(f), ErrorCode::Io, "write failed: " + path);
}

inline Container read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

}  // namespace projlab
