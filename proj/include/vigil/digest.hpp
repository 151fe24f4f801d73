#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vigil::digest {

std::string sha256_hex(std::string_view data);

// Little-endian float64 array <-> base64 text.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view text);

}  // namespace vigil::digest
