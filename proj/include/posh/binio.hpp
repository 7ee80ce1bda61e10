#pragma once

#include <cstdint>
#include <cstring>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "posh/errors.hpp"

// Little-endian binary IO helpers shared by all on-disk formats.

namespace posh::binio {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
inline void put_le(std::ostream& os, T v) {
  static_assert(std::is_integral_v<T>);
  unsigned char buf[sizeof(T)];
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
  put_bytes(os, buf, sizeof(T));
}

inline void put_u8(std::ostream& os, std::uint8_t v) { put_le(os, v); }
inline void put_u16(std::ostream& os, std::uint16_t v) { put_le(os, v); }
inline void put_u32(std::ostream& os, std::uint32_t v) { put_le(os, v); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_le(os, v); }
inline void put_i64(std::ostream& os, std::int64_t v) { put_le(os, v); }

inline void put_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

inline void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

inline void put_str(std::ostream& os, std::string_view s, const char* what) {
  if (s.size() > UINT16_MAX) raise(Errc::IoError, std::string(what) + " too long");
  put_u16(os, static_cast<std::uint16_t>(s.size()));
  put_bytes(os, s.data(), s.size());
}

/// Cursor over an in-memory buffer; every read checks remaining length.
class Reader {
 public:
  Reader(const void* data, std::size_t size)
      : p_(static_cast<const unsigned char*>(data)), size_(size) {}
  explicit Reader(const std::string& buf) : Reader(buf.data(), buf.size()) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

  const unsigned char* bytes(std::size_t n) {
    if (remaining() < n) raise(Errc::TruncatedFile, "unexpected end of data");
    const unsigned char* r = p_ + pos_;
    pos_ += n;
    return r;
  }

  template <typename T>
  T get_le() {
    static_assert(std::is_integral_v<T>);
    const unsigned char* b = bytes(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(b[i]) << (8 * i);
    return static_cast<T>(u);
  }

  std::uint8_t u8() { return get_le<std::uint8_t>(); }
  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  std::int64_t i64() { return get_le<std::int64_t>(); }

  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string str() {
    std::uint16_t n = u16();
    const unsigned char* b = bytes(n);
    return std::string(reinterpret_cast<const char*>(b), n);
  }

  void expect_magic(std::string_view magic, const char* what) {
    const unsigned char* b = bytes(magic.size());
    if (std::memcmp(b, magic.data(), magic.size()) != 0)
      raise(Errc::BadMagic, std::string("not a ") + what + " file");
  }

 private:
  const unsigned char* p_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

}  // namespace posh::binio
