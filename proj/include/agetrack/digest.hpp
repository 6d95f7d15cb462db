#pragma once

#include <string>
#include <string_view>

namespace agetrack {

// Lower-case hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

// First `n` hex characters of the SHA-256; used for context hashes and run ids.
std::string short_digest(std::string_view bytes, std::size_t n = 16);

}  // namespace agetrack
