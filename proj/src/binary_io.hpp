#pragma once

// Little-endian binary encoding for window and checkpoint files. Internal
// header.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>

#include "earda/errors.hpp"

namespace earda::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in host order; big-endian hosts need byte swapping");

class BinaryWriter {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }

  void put_bytes(std::string_view s) { bytes_.append(s); }

  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    bytes_.append(s);
  }

  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class BinaryReader {
 public:
  BinaryReader(std::string_view bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    return std::string(get_bytes(n));
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CorruptionError(what_ + ": truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace earda::detail
