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

#ifndef PARASPEECH_MANIFEST_HPP
#define PARASPEECH_MANIFEST_HPP

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "paraspeech/error.hpp"
#include "paraspeech/taxonomy.hpp"
#include "paraspeech/transcript.hpp"
#include "paraspeech/version.hpp"

namespace paraspeech {

using ordered_json = nlohmann::ordered_json;

enum class Source { Game, InTheWild, NonspeechAugment, Synthetic };
enum class Provenance { Human, Auto, Synthetic };

inline std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::Game: return "game";
    case Source::InTheWild: return "in-the-wild";
    case Source::NonspeechAugment: return "nonspeech-augment";
    case Source::Synthetic: return "synthetic";
  }
  return "game";
}

inline std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Human: return "human";
    case Provenance::Auto: return "auto";
    case Provenance::Synthetic: return "synthetic";
  }
  return "human";
}

inline std::optional<Source> parse_source(std::string_view s) {
  if (s == "game") return Source::Game;
  if (s == "in-the-wild") return Source::InTheWild;
  if (s == "nonspeech-augment") return Source::NonspeechAugment;
  if (s == "synthetic") return Source::Synthetic;
  return std::nullopt;
}

inline std::optional<Provenance> parse_provenance(std::string_view s) {
  if (s == "human") return Provenance::Human;
  if (s == "auto") return Provenance::Auto;
  if (s == "synthetic") return Provenance::Synthetic;
  return std::nullopt;
}

struct ManifestRecord {
  std::string id;
  std::string audio_path;
  double duration_s = 0.0;
  std::string speaker;
  Source source = Source::Game;
  TaggedTranscript transcript;
  Provenance provenance = Provenance::Human;
  std::optional<std::string> annotator;
  std::string lang = "zh";

  bool tagged() const { return tag_count(transcript) > 0; }
};

inline ordered_json to_json(const ManifestRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["audio_path"] = r.audio_path;
  j["duration_s"] = r.duration_s;
  j["speaker"] = r.speaker;
  j["source"] = to_string(r.source);
  j["transcript"] = serialize(r.transcript);
  j["provenance"] = to_string(r.provenance);
  j["annotator"] = r.annotator ? ordered_json(*r.annotator) : ordered_json(nullptr);
  j["lang"] = r.lang;
  return j;
}

/// One line of a manifest file before validation.
struct ManifestLine {
  std::size_t line_no = 0;
  nlohmann::json value;
  std::string syntax_error;
};

inline std::vector<ManifestLine> read_manifest_lines(std::istream& in) {
  std::vector<ManifestLine> lines;
  std::string text;
  std::size_t no = 0;
  while (std::getline(in, text)) {
    ++no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    ManifestLine line{no, {}, {}};
    try {
      line.value = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      line.syntax_error = e.what();
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::vector<ManifestLine> read_manifest_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open manifest " + path.string());
  return read_manifest_lines(in);
}

/// Decodes one record; throws Error(MalformedRecord) or TranscriptError.
inline ManifestRecord record_from_json(const nlohmann::json& j, const Taxonomy& t) {
  if (!j.is_object()) throw Error(ErrorKind::MalformedRecord, "record is not an object");
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw Error(ErrorKind::MalformedRecord, std::string("missing string field \"") + key + "\"");
    return it->get<std::string>();
  };
  ManifestRecord r;
  r.id = str("id");
  if (r.id.empty()) throw Error(ErrorKind::MalformedRecord, "empty id");
  r.audio_path = str("audio_path");
  auto dur = j.find("duration_s");
  if (dur == j.end() || !dur->is_number()) throw Error(ErrorKind::MalformedRecord, "missing numeric field \"duration_s\"");
  r.duration_s = dur->get<double>();
  if (!(r.duration_s > 0.0)) throw Error(ErrorKind::NonpositiveDuration, "nonpositive duration " + std::to_string(r.duration_s));
  r.speaker = str("speaker");
  auto src = parse_source(str("source"));
  if (!src) throw Error(ErrorKind::MalformedRecord, "unknown source \"" + str("source") + "\"");
  r.source = *src;
  auto prov = parse_provenance(str("provenance"));
  if (!prov) throw Error(ErrorKind::MalformedRecord, "unknown provenance \"" + str("provenance") + "\"");
  r.provenance = *prov;
  if (auto a = j.find("annotator"); a != j.end() && !a->is_null()) {
    if (!a->is_string()) throw Error(ErrorKind::MalformedRecord, "annotator must be a string or null");
    r.annotator = a->get<std::string>();
  }
  r.lang = j.contains("lang") ? str("lang") : std::string("zh");
  r.transcript = parse_transcript(str("transcript"), t);
  return r;
}

struct RecordIssue {
  std::size_t line_no = 0;
  std::string id;
  ErrorKind kind = ErrorKind::MalformedRecord;
  std::string message;
};

struct ValidationReport {
  std::vector<RecordIssue> errors;
  std::vector<std::string> warnings;
  std::vector<ManifestRecord> records;  // valid records, input order

  std::size_t valid_count() const { return records.size(); }
  bool ok() const { return errors.empty(); }
};

/// Checks every line against the record schema and the taxonomy. Decoding
/// runs on `threads` workers; the report is identical for any thread count.
inline ValidationReport validate_manifest(const std::vector<ManifestLine>& lines, const Taxonomy& t,
                                          unsigned threads = 1) {
  struct Decoded {
    std::optional<ManifestRecord> record;
    std::optional<RecordIssue> issue;
  };
  std::vector<Decoded> decoded(lines.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& line = lines[i];
      std::string id;
      if (line.value.is_object() && line.value.contains("id") && line.value["id"].is_string())
        id = line.value["id"].get<std::string>();
      if (!line.syntax_error.empty()) {
        decoded[i].issue = RecordIssue{line.line_no, id, ErrorKind::MalformedRecord, line.syntax_error};
        continue;
      }
      try {
        decoded[i].record = record_from_json(line.value, t);
      } catch (const Error& e) {
        decoded[i].issue = RecordIssue{line.line_no, id, e.kind(), e.what()};
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, unsigned(std::max<std::size_t>(1, lines.size()))));
  if (threads == 1) {
    work(0, lines.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (lines.size() + threads - 1) / threads;
    for (std::size_t b = 0; b < lines.size(); b += chunk) pool.emplace_back(work, b, std::min(lines.size(), b + chunk));
  }

  ValidationReport rep;
  std::unordered_set<std::string> seen;
  std::vector<bool> used(t.size(), false);
  for (auto& d : decoded) {
    if (d.issue) {
      rep.errors.push_back(std::move(*d.issue));
      continue;
    }
    auto& r = *d.record;
    if (!seen.insert(r.id).second) {
      rep.errors.push_back({lines[&d - decoded.data()].line_no, r.id, ErrorKind::DuplicateId, "duplicate id \"" + r.id + "\""});
      continue;
    }
    for (const auto& ev : tag_events(r.transcript)) used[ev.category] = true;
    rep.records.push_back(std::move(r));
  }
  for (std::size_t c = 0; c < t.size(); ++c)
    if (!used[c]) rep.warnings.push_back("category \"" + t[c].id + "\" has no events");
  return rep;
}

inline ordered_json to_json(const ValidationReport& rep, const Taxonomy& t) {
  ordered_json errors = ordered_json::array();
  for (const auto& e : rep.errors)
    errors.push_back({{"line", e.line_no}, {"id", e.id}, {"kind", to_string(e.kind)}, {"message", e.message}});
  return {{"toolkit_version", kToolkitVersion},
          {"taxonomy_version", t.version()},
          {"valid_records", rep.valid_count()},
          {"error_count", rep.errors.size()},
          {"errors", std::move(errors)},
          {"warnings", rep.warnings}};
}

/// Loads a manifest and fails on the first invalid line.
inline std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path, const Taxonomy& t) {
  auto rep = validate_manifest(read_manifest_lines(path), t);
  if (!rep.ok()) {
    const auto& e = rep.errors.front();
    throw Error(e.kind, path.string() + ":" + std::to_string(e.line_no) + ": " + e.message);
  }
  return std::move(rep.records);
}

inline std::string manifest_text(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& manifest) {
  return std::filesystem::path(manifest.string() + ".meta.json");
}

inline ordered_json sidecar_json(const Taxonomy& t) {
  return {{"format", "paraspeech-manifest"}, {"taxonomy_version", t.version()}, {"toolkit_version", kToolkitVersion}};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

/// Writes the manifest and its sidecar header.
inline void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records, const Taxonomy& t) {
  write_text_file(path, manifest_text(records));
  write_text_file(sidecar_path(path), sidecar_json(t).dump(2) + "\n");
}

/// Taxonomy version recorded beside a manifest, if a sidecar exists.
inline std::optional<std::string> sidecar_taxonomy_version(const std::filesystem::path& manifest) {
  std::ifstream in(sidecar_path(manifest), std::ios::binary);
  if (!in) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(in);
    return j.value("taxonomy_version", std::string());
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

}  // namespace paraspeech

#endif  // PARASPEECH_MANIFEST_HPP
