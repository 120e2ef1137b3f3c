#pragma once

#include <string>
#include <string_view>

namespace pcc {

/// Canonical form used when comparing sentences for overlap: Unicode NFC,
/// then leading/trailing whitespace removed. No case folding. Invalid UTF-8
/// is compared byte-for-byte after trimming.
std::string normalize_text(std::string_view text);

} // namespace pcc
