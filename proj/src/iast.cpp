#include "anvaya/iast.hpp"

#include "anvaya/error.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>

namespace anvaya {

namespace {

constexpr char32_t kAvagraha = 0x02BC;

// Precomposed letters of the repertoire, lower and upper case.
constexpr std::array<char32_t, 32> kIastLetters = {
    0x0101, 0x0100,  // ā Ā
    0x012B, 0x012A,  // ī Ī
    0x016B, 0x016A,  // ū Ū
    0x1E5B, 0x1E5A,  // ṛ Ṛ
    0x1E5D, 0x1E5C,  // ṝ Ṝ
    0x1E37, 0x1E36,  // ḷ Ḷ
    0x1E39, 0x1E38,  // ḹ Ḹ
    0x1E45, 0x1E44,  // ṅ Ṅ
    0x00F1, 0x00D1,  // ñ Ñ
    0x1E6D, 0x1E6C,  // ṭ Ṭ
    0x1E0D, 0x1E0C,  // ḍ Ḍ
    0x1E47, 0x1E46,  // ṇ Ṇ
    0x015B, 0x015A,  // ś Ś
    0x1E63, 0x1E62,  // ṣ Ṣ
    0x1E25, 0x1E24,  // ḥ Ḥ
    0x1E43, 0x1E42,  // ṃ Ṃ
};

template <typename Fn>
void for_each_code_point(std::string_view text, Fn&& fn) {
    const auto* s = reinterpret_cast<const uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    std::size_t index = 0;
    while (i < length) {
        UChar32 c = 0;
        U8_NEXT(s, i, length, c);
        fn(index++, c < 0 ? char32_t{0xFFFD} : static_cast<char32_t>(c));
    }
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

}  // namespace

std::string encode_utf8(char32_t cp) {
    std::string out;
    std::array<uint8_t, U8_MAX_LENGTH> buf{};
    int32_t n = 0;
    UBool err = false;
    U8_APPEND(buf.data(), n, U8_MAX_LENGTH, static_cast<UChar32>(cp), err);
    if (err) return "\xEF\xBF\xBD";
    out.assign(reinterpret_cast<const char*>(buf.data()), static_cast<std::size_t>(n));
    return out;
}

std::string normalize_iast(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");

    icu::UnicodeString source = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    source.findAndReplace(icu::UnicodeString(static_cast<UChar32>(0x27)),
                          icu::UnicodeString(static_cast<UChar32>(kAvagraha)));
    source.findAndReplace(icu::UnicodeString(static_cast<UChar32>(0x2019)),
                          icu::UnicodeString(static_cast<UChar32>(kAvagraha)));

    icu::UnicodeString composed = nfc->normalize(source, status);
    if (U_FAILURE(status)) throw Error("NFC normalization failed");
    std::string out;
    composed.toUTF8String(out);
    return out;
}

bool is_iast_char(char32_t cp) {
    if (cp < 0x80) {
        const auto c = static_cast<char>(cp);
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == ' ' || c == ',' || c == '.' || c == '?' || c == '!';
    }
    if (cp == kAvagraha) return true;
    return std::find(kIastLetters.begin(), kIastLetters.end(), cp) != kIastLetters.end();
}

IastValidation validate_iast(std::string_view text) {
    IastValidation result;
    for_each_code_point(text, [&](std::size_t index, char32_t cp) {
        if (is_space(cp) || is_iast_char(cp)) return;
        result.violations.push_back({index, cp, encode_utf8(cp)});
    });
    return result;
}

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> pieces;
    std::string current;
    for_each_code_point(text, [&](std::size_t, char32_t cp) {
        if (is_space(cp)) {
            if (!current.empty()) pieces.push_back(std::move(current));
            current.clear();
        } else {
            current += encode_utf8(cp);
        }
    });
    if (!current.empty()) pieces.push_back(std::move(current));
    return pieces;
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    for (const auto& piece : split_whitespace(text)) {
        if (!out.empty()) out += ' ';
        out += piece;
    }
    return out;
}

}  // namespace anvaya
