#include "vigil/digest.hpp"

#include "vigil/error.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <bit>
#include <cstdint>
#include <cstring>

namespace vigil::digest {

static_assert(std::endian::native == std::endian::little, "bundle encoding assumes a little-endian host");

std::string sha256_hex(std::string_view data) {
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char c : md) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 15]);
  }
  return out;
}

std::string encode_doubles(std::span<const double> values) {
  const std::size_t bytes = values.size() * sizeof(double);
  std::string out(4 * ((bytes + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(values.data()), static_cast<int>(bytes));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<double> decode_doubles(std::string_view text) {
  if (text.empty()) return {};
  if (text.size() % 4 != 0) throw Error(ErrorCode::Parse, "base64 payload length is not a multiple of 4");
  std::string raw(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(raw.data()),
                                reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::Parse, "invalid base64 payload");
  // EVP_DecodeBlock keeps the padding bytes; drop them.
  std::size_t size = static_cast<std::size_t>(n);
  if (text.ends_with("==")) size -= 2;
  else if (text.ends_with("=")) size -= 1;
  if (size % sizeof(double) != 0) throw Error(ErrorCode::Parse, "base64 payload is not a float64 array");
  std::vector<double> values(size / sizeof(double));
  std::memcpy(values.data(), raw.data(), size);
  return values;
}

}  // namespace vigil::digest
