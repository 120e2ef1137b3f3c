#include "pcc/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/utypes.h>

namespace pcc {

namespace {

std::string_view trim(std::string_view s) {
    constexpr std::string_view kSpace = " \t\n\r\f\v";
    const auto first = s.find_first_not_of(kSpace);
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(kSpace);
    return s.substr(first, last - first + 1);
}

bool is_ascii(std::string_view s) {
    for (unsigned char c : s) {
        if (c >= 0x80) {
            return false;
        }
    }
    return true;
}

} // namespace

std::string normalize_text(std::string_view text) {
    if (is_ascii(text)) {
        return std::string(trim(text));
    }

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) {
        return std::string(trim(text));
    }
    const icu::UnicodeString source =
        icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    if (source.isBogus()) {
        return std::string(trim(text));
    }
    icu::UnicodeString normalized = nfc->normalize(source, status);
    if (U_FAILURE(status)) {
        return std::string(trim(text));
    }
    normalized.trim();
    std::string out;
    normalized.toUTF8String(out);
    // UnicodeString::trim only strips whitespace in the Unicode sense; apply
    // the ASCII trim too so both branches agree on ASCII input.
    return std::string(trim(out));
}

} // namespace pcc
