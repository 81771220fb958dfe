#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace xlayer {

/// 64-bit FNV-1a. Used to fingerprint inputs and canonical reports; not a
/// cryptographic hash.
std::uint64_t fnv1a64(std::string_view data);

/// Hex-formatted digest, e.g. "fnv1a64:cbf29ce484222325".
std::string digest_string(std::string_view data);

}  // namespace xlayer
