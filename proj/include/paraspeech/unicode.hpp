// Copyright 2026 The paraspeech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PARASPEECH_UNICODE_HPP
#define PARASPEECH_UNICODE_HPP

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "paraspeech/error.hpp"

namespace paraspeech::unicode {

/// NFC-normalizes UTF-8 text. Invalid sequences are replaced with U+FFFD by ICU.
inline std::string normalize_nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorKind::InvalidArgument, "ICU NFC instance unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (nfc->isNormalized(src, status) && U_SUCCESS(status)) {
    std::string out;
    src.toUTF8String(out);
    return out;
  }
  status = U_ZERO_ERROR;
  icu::UnicodeString dst = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw Error(ErrorKind::InvalidArgument, "NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

/// Splits UTF-8 text into extended grapheme clusters.
inline std::vector<std::string> graphemes(std::string_view text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) throw Error(ErrorKind::InvalidArgument, "ICU break iterator unavailable");
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  it->setText(u);
  int32_t start = it->first();
  for (int32_t end = it->next(); end != icu::BreakIterator::DONE; start = end, end = it->next()) {
    std::string piece;
    u.tempSubStringBetween(start, end).toUTF8String(piece);
    out.push_back(std::move(piece));
  }
  return out;
}

inline UChar32 first_code_point(std::string_view cluster) {
  if (cluster.empty()) return U_SENTINEL;
  int32_t i = 0;
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(cluster.data()), i, static_cast<int32_t>(cluster.size()), c);
  return c;
}

inline bool is_whitespace(std::string_view cluster) {
  UChar32 c = first_code_point(cluster);
  return c >= 0 && u_isUWhiteSpace(c);
}

/// Punctuation by general category (P*), e.g. "，", "。", "!", "?".
inline bool is_punctuation(std::string_view cluster) {
  UChar32 c = first_code_point(cluster);
  return c >= 0 && u_ispunct(c);
}

}  // namespace paraspeech::unicode

#endif  // PARASPEECH_UNICODE_HPP
