#include "ssvep/error.hpp"

namespace ssvep {

const char* to_string(FormatError::Kind kind) noexcept {
  switch (kind) {
    case FormatError::Kind::bad_magic: return "bad magic";
    case FormatError::Kind::version_mismatch: return "version mismatch";
    case FormatError::Kind::truncated: return "truncated payload";
    case FormatError::Kind::malformed: return "malformed field";
    case FormatError::Kind::io: return "i/o failure";
  }
  return "unknown";
}

FormatError::FormatError(Kind kind, std::uint64_t offset, const std::string& detail)
    : DataError(std::string(to_string(kind)) + " at byte offset " + std::to_string(offset) +
                (detail.empty() ? std::string() : ": " + detail)),
      kind_(kind),
      offset_(offset) {}

}  // namespace ssvep
