#pragma once

#include <string>
#include <string_view>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "readlevel/errors.hpp"

namespace readlevel {

namespace detail {
inline const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  static const icu::Normalizer2* instance =
      icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || instance == nullptr)
    throw ConfigError("ICU NFC normalizer unavailable");
  return *instance;
}
}  // namespace detail

// Text cleanup applied to raw sentences before anything else looks at them:
//   - runs of one repeated punctuation codepoint collapse to a single one
//     (mixed runs like `?!` are kept as-is),
//   - every run of Unicode whitespace becomes one ASCII space,
//   - leading/trailing whitespace is dropped,
//   - the result is normalized to NFC.
// Total over arbitrary byte strings; ill-formed UTF-8 becomes U+FFFD.
// Idempotent: normalize_text(normalize_text(s)) == normalize_text(s).
inline std::string normalize_text(std::string_view raw) {
  const icu::UnicodeString input = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));

  icu::UnicodeString cleaned;
  bool pending_space = false;
  UChar32 prev_punct = -1;
  for (int32_t i = 0; i < input.length();) {
    const UChar32 cp = input.char32At(i);
    i += U16_LENGTH(cp);
    if (u_isUWhiteSpace(cp)) {
      if (cleaned.length() > 0) pending_space = true;  // drops leading runs
      prev_punct = -1;
      continue;
    }
    if (u_ispunct(cp) && cp == prev_punct) continue;  // whitespace resets the run
    if (pending_space) {
      cleaned.append(static_cast<UChar>(u' '));
      pending_space = false;
    }
    cleaned.append(cp);
    prev_punct = u_ispunct(cp) ? cp : -1;
  }

  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString composed = detail::nfc().normalize(cleaned, status);
  if (U_FAILURE(status)) throw ValidationError("NFC normalization failed");

  std::string out;
  composed.toUTF8String(out);
  return out;
}

}  // namespace readlevel
