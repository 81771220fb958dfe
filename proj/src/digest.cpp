#include "xlayer/digest.hpp"

#include <iomanip>
#include <sstream>

namespace xlayer {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string digest_string(std::string_view data) {
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(data);
  return out.str();
}

}  // namespace xlayer
