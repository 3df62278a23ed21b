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

#ifndef PARASPEECH_TRANSCRIPT_HPP
#define PARASPEECH_TRANSCRIPT_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "paraspeech/error.hpp"
#include "paraspeech/taxonomy.hpp"
#include "paraspeech/unicode.hpp"

namespace paraspeech {

/// A lexical grapheme cluster or a paralinguistic tag. Tags carry their
/// canonical surface in `text` and the taxonomy position in `category`.
struct Token {
  enum class Kind : unsigned char { Lexical, Tag };

  static constexpr std::size_t kNoCategory = static_cast<std::size_t>(-1);

  Kind kind = Kind::Lexical;
  std::string text;
  std::size_t category = kNoCategory;

  static Token lexical(std::string unit) { return {Kind::Lexical, std::move(unit), kNoCategory}; }
  static Token tag(const Taxonomy& t, std::size_t category) {
    return {Kind::Tag, t[category].surface, category};
  }

  bool is_tag() const noexcept { return kind == Kind::Tag; }
  bool is_lexical() const noexcept { return kind == Kind::Lexical; }

  // A tag never equals a lexical unit; tags match on category alone.
  bool operator==(const Token& o) const noexcept {
    if (kind != o.kind) return false;
    return kind == Kind::Tag ? category == o.category : text == o.text;
  }
};

struct TaggedTranscript {
  std::vector<Token> tokens;
  std::string raw;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

struct TagEvent {
  std::size_t category;
  std::size_t token_index;
  std::size_t char_offset;

  bool operator==(const TagEvent&) const = default;
};

namespace detail {

inline void append_lexical(std::vector<Token>& out, std::string_view text) {
  if (text.empty()) return;
  for (auto& g : unicode::graphemes(text)) {
    if (unicode::is_whitespace(g)) continue;
    out.push_back(Token::lexical(std::move(g)));
  }
}

}  // namespace detail

/// Parses inline-tag text such as "不知道[Breathing]，我没想过". Input is NFC
/// normalized first; reported byte offsets refer to the normalized string.
/// Brackets are reserved: every "[" must open a known surface.
inline TaggedTranscript parse_transcript(std::string_view raw, const Taxonomy& t) {
  TaggedTranscript tt;
  tt.raw = std::string(raw);
  const std::string text = unicode::normalize_nfc(raw);

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find_first_of("[]", pos);
    if (open == std::string::npos) {
      detail::append_lexical(tt.tokens, std::string_view(text).substr(pos));
      break;
    }
    detail::append_lexical(tt.tokens, std::string_view(text).substr(pos, open - pos));
    if (text[open] == ']') throw TranscriptError(ErrorKind::UnbalancedBracket, "]", open);

    std::size_t close = text.find_first_of("[]", open + 1);
    if (close == std::string::npos || text[close] == '[')
      throw TranscriptError(ErrorKind::UnbalancedBracket, "[", open);

    std::string_view surface = std::string_view(text).substr(open, close - open + 1);
    const ParaCategory* cat = t.resolve_surface(surface);
    if (cat == nullptr) throw TranscriptError(ErrorKind::UnknownTag, std::string(surface), open);
    tt.tokens.push_back(Token::tag(t, t.index_of(*cat)));
    pos = close + 1;
  }
  return tt;
}

inline std::string serialize(const TaggedTranscript& tt) {
  std::string out;
  for (const auto& tok : tt.tokens) out += tok.text;
  return out;
}

inline TaggedTranscript strip_tags(const TaggedTranscript& tt) {
  TaggedTranscript out;
  for (const auto& tok : tt.tokens)
    if (tok.is_lexical()) out.tokens.push_back(tok);
  out.raw = serialize(out);
  return out;
}

/// Removes lexical tokens whose leading code point is Unicode punctuation.
inline TaggedTranscript drop_punctuation(const TaggedTranscript& tt) {
  TaggedTranscript out;
  for (const auto& tok : tt.tokens)
    if (tok.is_tag() || !unicode::is_punctuation(tok.text)) out.tokens.push_back(tok);
  out.raw = serialize(out);
  return out;
}

inline std::vector<TagEvent> tag_events(const TaggedTranscript& tt) {
  std::vector<TagEvent> events;
  std::size_t lexical_seen = 0;
  for (std::size_t i = 0; i < tt.tokens.size(); ++i) {
    if (tt.tokens[i].is_tag())
      events.push_back({tt.tokens[i].category, i, lexical_seen});
    else
      ++lexical_seen;
  }
  return events;
}

inline std::size_t tag_count(const TaggedTranscript& tt) {
  std::size_t n = 0;
  for (const auto& tok : tt.tokens) n += tok.is_tag();
  return n;
}

}  // namespace paraspeech

#endif  // PARASPEECH_TRANSCRIPT_HPP
