#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace uiground {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_hex(std::span<const std::uint8_t> data);

// Incremental SHA-256 for content keys built from several parts.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view data);
  Sha256& update(std::span<const std::uint8_t> data);
  // Appends data prefixed by its length so adjacent fields cannot alias.
  Sha256& update_field(std::string_view data);
  std::string hex();

 private:
  struct Impl;
  Impl* impl_;
};

std::string base64_encode(std::span<const std::uint8_t> data);

// SHA-256 of a file's bytes. Throws InputError when unreadable.
std::string file_sha256_hex(const std::string& path);

}  // namespace uiground
