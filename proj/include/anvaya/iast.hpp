#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace anvaya {

// Composes to NFC and maps apostrophe variants (' and U+2019) to the
// avagraha U+02BC.
std::string normalize_iast(std::string_view text);

struct IastViolation {
    std::size_t position = 0;  // code point offset into the input
    char32_t code_point = 0;
    std::string character;  // UTF-8 encoding of code_point

    bool operator==(const IastViolation&) const = default;
};

struct IastValidation {
    std::vector<IastViolation> violations;

    bool ok() const { return violations.empty(); }
};

/// Checks every non-whitespace code point of `text` against the accepted
/// repertoire: ASCII letters and digits, the punctuation `, . ? !`, the
/// avagraha U+02BC and the precomposed letters
/// ā ī ū ṛ ṝ ḷ ḹ ṅ ñ ṭ ḍ ṇ ś ṣ ḥ ṃ in both cases.
///
/// The text is checked as given; decomposed input (base letter plus
/// combining mark) is reported, so normalize first when that matters.
/// Invalid UTF-8 bytes are reported as U+FFFD.
IastValidation validate_iast(std::string_view text);

bool is_iast_char(char32_t cp);

/// Splits on Unicode whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

/// Trims and collapses internal whitespace runs to a single space.
std::string collapse_whitespace(std::string_view text);

std::string encode_utf8(char32_t cp);

}  // namespace anvaya
