#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "sadq/common/error.hpp"

namespace sadq {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written little-endian; big-endian hosts are not supported");

/// Append-only little-endian byte sink used by checkpoints and state snapshots.
class ByteWriter {
 public:
  template <class T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buffer_.append(raw, sizeof(T));
  }

  void put_bool(bool value) { put<std::uint8_t>(value ? 1 : 0); }

  void put_string(std::string_view s) {
    put<std::uint64_t>(s.size());
    buffer_.append(s.data(), s.size());
  }

  void put_doubles(const double* data, std::size_t count) {
    put<std::uint64_t>(count);
    buffer_.append(reinterpret_cast<const char*>(data), count * sizeof(double));
  }

  void put_doubles(const std::vector<double>& v) { put_doubles(v.data(), v.size()); }

  const std::string& bytes() const { return buffer_; }
  std::string take() { return std::move(buffer_); }

 private:
  std::string buffer_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  template <class T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  bool get_bool() { return get<std::uint8_t>() != 0; }

  std::string get_string() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::vector<double> get_doubles() {
    const auto n = get<std::uint64_t>();
    need(n * sizeof(double));
    std::vector<double> v(n);
    std::memcpy(v.data(), data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail(ErrorKind::kCorruptChecksum, "unexpected end of data");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace sadq
