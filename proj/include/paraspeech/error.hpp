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

#ifndef PARASPEECH_ERROR_HPP
#define PARASPEECH_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace paraspeech {

enum class ErrorKind {
  DuplicateId,
  DuplicateSurface,
  MalformedSurface,
  EmptyTaxonomy,
  MalformedConfig,
  UnknownTag,
  UnbalancedBracket,
  EmptyReferenceCorpus,
  NoTaggedReference,
  DimensionMismatch,
  LengthMismatch,
  InvalidArgument,
  ZeroTotalWeight,
  InsufficientSpeakers,
  OrphanHypothesis,
  PoolExhausted,
  TooFewAnnotators,
  MalformedRecord,
  NonpositiveDuration,
  MalformedMatrix,
  UnknownRecord,
  Io,
};

constexpr std::string_view to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::DuplicateSurface: return "DuplicateSurface";
    case ErrorKind::MalformedSurface: return "MalformedSurface";
    case ErrorKind::EmptyTaxonomy: return "EmptyTaxonomy";
    case ErrorKind::MalformedConfig: return "MalformedConfig";
    case ErrorKind::UnknownTag: return "UnknownTag";
    case ErrorKind::UnbalancedBracket: return "UnbalancedBracket";
    case ErrorKind::EmptyReferenceCorpus: return "EmptyReferenceCorpus";
    case ErrorKind::NoTaggedReference: return "NoTaggedReference";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ZeroTotalWeight: return "ZeroTotalWeight";
    case ErrorKind::InsufficientSpeakers: return "InsufficientSpeakers";
    case ErrorKind::OrphanHypothesis: return "OrphanHypothesis";
    case ErrorKind::PoolExhausted: return "PoolExhausted";
    case ErrorKind::TooFewAnnotators: return "TooFewAnnotators";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::NonpositiveDuration: return "NonpositiveDuration";
    case ErrorKind::MalformedMatrix: return "MalformedMatrix";
    case ErrorKind::UnknownRecord: return "UnknownRecord";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Base of every exception thrown by the toolkit. `kind()` is stable and is
/// what reports and HTTP error bodies carry.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Transcript grammar violation. `byte_offset` indexes the normalized input.
class TranscriptError : public Error {
 public:
  TranscriptError(ErrorKind kind, std::string surface, std::size_t byte_offset)
      : Error(kind, describe(kind, surface, byte_offset)),
        surface_(std::move(surface)),
        byte_offset_(byte_offset) {}

  const std::string& surface() const noexcept { return surface_; }
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  static std::string describe(ErrorKind kind, const std::string& surface, std::size_t off) {
    if (kind == ErrorKind::UnknownTag)
      return "unknown tag \"" + surface + "\" at byte " + std::to_string(off);
    return "unbalanced bracket at byte " + std::to_string(off);
  }

  std::string surface_;
  std::size_t byte_offset_;
};

class PoolExhaustedError : public Error {
 public:
  PoolExhaustedError(std::string pool, std::size_t needed, std::size_t available)
      : Error(ErrorKind::PoolExhausted, pool + " pool needs " + std::to_string(needed) +
                                            " records, has " + std::to_string(available)),
        pool_(std::move(pool)),
        needed_(needed),
        available_(available) {}

  const std::string& pool() const noexcept { return pool_; }
  std::size_t needed() const noexcept { return needed_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::string pool_;
  std::size_t needed_;
  std::size_t available_;
};

}  // namespace paraspeech

#endif  // PARASPEECH_ERROR_HPP
