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

#ifndef PARASPEECH_ANNOTATION_HPP
#define PARASPEECH_ANNOTATION_HPP

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstddef>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "paraspeech/corpus.hpp"
#include "paraspeech/error.hpp"
#include "paraspeech/manifest.hpp"
#include "paraspeech/metrics.hpp"
#include "paraspeech/taxonomy.hpp"
#include "paraspeech/transcript.hpp"

namespace paraspeech {

struct AnnotationSubmission {
  std::string record_id;
  std::string annotator;
  std::string transcript;
  std::string submitted_at;
  std::string client_version;
};

inline nlohmann::ordered_json to_json(const AnnotationSubmission& s) {
  return {{"record_id", s.record_id},
          {"annotator", s.annotator},
          {"transcript", s.transcript},
          {"submitted_at", s.submitted_at},
          {"client_version", s.client_version}};
}

inline AnnotationSubmission submission_from_json(const nlohmann::json& j) {
  try {
    AnnotationSubmission s;
    s.record_id = j.at("record_id").get<std::string>();
    s.annotator = j.at("annotator").get<std::string>();
    s.transcript = j.at("transcript").get<std::string>();
    s.submitted_at = j.value("submitted_at", std::string());
    s.client_version = j.value("client_version", std::string());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, e.what());
  }
}

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Reads a submission log. Later lines supersede earlier ones for the same
/// (record, annotator); a torn final line from a crash is ignored.
inline std::vector<AnnotationSubmission> read_submission_log(const std::filesystem::path& path) {
  std::vector<AnnotationSubmission> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(submission_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw Error(ErrorKind::MalformedRecord, "corrupt submission log line in " + path.string());
    }
  }
  return out;
}

using SubmissionKey = std::pair<std::string, std::string>;  // (record id, annotator)

inline std::map<SubmissionKey, AnnotationSubmission> latest_submissions(const std::vector<AnnotationSubmission>& log) {
  std::map<SubmissionKey, AnnotationSubmission> latest;
  for (const auto& s : log) latest.insert_or_assign({s.record_id, s.annotator}, s);
  return latest;
}

/// One annotator's view of the corpus: every record they submitted, with
/// their latest transcript, marked human-annotated. Sorted by id.
inline std::vector<ManifestRecord> export_annotations(const std::vector<ManifestRecord>& base,
                                                      const std::vector<AnnotationSubmission>& log,
                                                      const std::string& annotator, const Taxonomy& t) {
  auto latest = latest_submissions(log);
  std::vector<ManifestRecord> out;
  for (const auto& r : detail::sorted_by_id(base)) {
    auto it = latest.find({r.id, annotator});
    if (it == latest.end()) continue;
    ManifestRecord e = r;
    e.transcript = parse_transcript(it->second.transcript, t);
    e.provenance = Provenance::Human;
    e.annotator = annotator;
    out.push_back(std::move(e));
  }
  return out;
}

/// Presence vectors for the records both manifests share, ordered by id.
inline std::pair<std::vector<TagVector>, std::vector<TagVector>> paired_presence(
    const std::vector<ManifestRecord>& first, const std::vector<ManifestRecord>& second, const Taxonomy& t) {
  std::unordered_map<std::string, const ManifestRecord*> other;
  for (const auto& r : second) other.emplace(r.id, &r);
  std::vector<TagVector> a, b;
  for (const auto& r : detail::sorted_by_id(first)) {
    auto it = other.find(r.id);
    if (it == other.end()) continue;
    a.push_back(presence_vector(r.transcript, t.size()));
    b.push_back(presence_vector(it->second->transcript, t.size()));
  }
  return {std::move(a), std::move(b)};
}

/// Outcome of a rejected submission; mirrors the HTTP error body.
struct Rejection {
  ErrorKind kind;
  std::string message;
  std::optional<std::size_t> byte_offset;
  std::optional<std::string> surface;
};

struct Acceptance {
  std::string transcript;  // canonical form written to the log
  std::size_t sequence = 0;
};

/// Backing state for the annotation service. Submissions go to an
/// append-only log and are fsync'ed before they are acknowledged. Batch
/// hand-outs are logged beside it so restarts never re-issue a record to
/// the same annotator.
class AnnotationStore {
 public:
  AnnotationStore(std::vector<ManifestRecord> records, Taxonomy taxonomy, std::map<std::string, AnnotatorPair> cross,
                  std::filesystem::path log_path, std::filesystem::path audio_root = {})
      : records_(detail::sorted_by_id(std::move(records))),
        taxonomy_(std::move(taxonomy)),
        cross_(std::move(cross)),
        log_path_(std::move(log_path)),
        audio_root_(std::move(audio_root)) {
    for (std::size_t i = 0; i < records_.size(); ++i) index_.emplace(records_[i].id, i);
    for (const auto& [id, pair] : cross_)
      if (!index_.count(id)) throw Error(ErrorKind::UnknownRecord, "cross assignment names unknown record \"" + id + "\"");
    for (const auto& s : read_submission_log(log_path_)) {
      ++submissions_;
      claim(s.record_id, s.annotator);
      submitted_[s.annotator].insert(s.record_id);
    }
    std::ifstream batches(batch_log_path(), std::ios::binary);
    std::string line;
    while (std::getline(batches, line)) {
      try {
        auto j = nlohmann::json::parse(line);
        claim(j.at("record_id").get<std::string>(), j.at("annotator").get<std::string>());
      } catch (const std::exception&) {
      }
    }
    log_fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (log_fd_ < 0) throw Error(ErrorKind::Io, "cannot open submission log " + log_path_.string());
    batch_fd_ = ::open(batch_log_path().c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (batch_fd_ < 0) throw Error(ErrorKind::Io, "cannot open batch log " + batch_log_path().string());
  }

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  ~AnnotationStore() {
    if (log_fd_ >= 0) ::close(log_fd_);
    if (batch_fd_ >= 0) ::close(batch_fd_);
  }

  const Taxonomy& taxonomy() const noexcept { return taxonomy_; }
  const std::vector<ManifestRecord>& records() const noexcept { return records_; }
  const std::filesystem::path& log_path() const noexcept { return log_path_; }

  /// Up to `n` records for `annotator`, in id order: records cross-assigned
  /// to them plus single-annotation records nobody has claimed yet.
  std::vector<ManifestRecord> batch(const std::string& annotator, std::size_t n) {
    if (annotator.empty()) throw Error(ErrorKind::InvalidArgument, "annotator is required");
    std::lock_guard lock(mu_);
    std::vector<ManifestRecord> out;
    for (const auto& r : records_) {
      if (out.size() >= n) break;
      auto& holders = claims_[r.id];
      if (holders.count(annotator)) continue;
      auto cross = cross_.find(r.id);
      if (cross != cross_.end()) {
        if (cross->second.first != annotator && cross->second.second != annotator) continue;
      } else if (!holders.empty()) {
        continue;
      }
      append_line(batch_fd_, nlohmann::json{{"record_id", r.id}, {"annotator", annotator}}.dump());
      holders.insert(annotator);
      out.push_back(r);
    }
    return out;
  }

  /// Validates and durably appends a submission, or explains the rejection.
  std::variant<Acceptance, Rejection> submit(AnnotationSubmission s) {
    if (s.annotator.empty()) return Rejection{ErrorKind::InvalidArgument, "annotator is required", {}, {}};
    if (!index_.count(s.record_id))
      return Rejection{ErrorKind::UnknownRecord, "unknown record \"" + s.record_id + "\"", {}, {}};
    try {
      s.transcript = serialize(parse_transcript(s.transcript, taxonomy_));
    } catch (const TranscriptError& e) {
      return Rejection{e.kind(), e.what(), e.byte_offset(), e.surface()};
    }
    if (s.submitted_at.empty()) s.submitted_at = utc_timestamp();
    std::lock_guard lock(mu_);
    append_line(log_fd_, to_json(s).dump());
    ++submissions_;
    claims_[s.record_id].insert(s.annotator);
    submitted_[s.annotator].insert(s.record_id);
    return Acceptance{s.transcript, submissions_};
  }

  nlohmann::ordered_json progress() const {
    std::lock_guard lock(mu_);
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (const auto& [annotator, ids] : submitted_) per[annotator] = ids.size();
    std::size_t done = 0;
    for (const auto& r : records_) {
      std::size_t need = cross_.count(r.id) ? 2 : 1, have = 0;
      for (const auto& [annotator, ids] : submitted_) have += ids.count(r.id);
      done += have >= need;
    }
    return {{"records", records_.size()},
            {"cross_assigned", cross_.size()},
            {"completed_records", done},
            {"submissions", submissions_},
            {"annotators", std::move(per)}};
  }

  /// Resolved audio file for a record, or nullopt for unknown ids.
  std::optional<std::filesystem::path> audio_path(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    std::filesystem::path p = records_[it->second].audio_path;
    return p.is_absolute() ? p : audio_root_ / p;
  }

  std::vector<AnnotationSubmission> submissions() const {
    std::lock_guard lock(mu_);
    return read_submission_log(log_path_);
  }

 private:
  std::filesystem::path batch_log_path() const { return std::filesystem::path(log_path_.string() + ".batches"); }

  void claim(const std::string& id, const std::string& annotator) { claims_[id].insert(annotator); }

  static void append_line(int fd, std::string line) {
    line.push_back('\n');
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      ssize_t w = ::write(fd, p, left);
      if (w < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorKind::Io, "append to log failed");
      }
      p += w;
      left -= static_cast<std::size_t>(w);
    }
    if (::fsync(fd) != 0) throw Error(ErrorKind::Io, "fsync of log failed");
  }

  std::vector<ManifestRecord> records_;
  Taxonomy taxonomy_;
  std::map<std::string, AnnotatorPair> cross_;
  std::filesystem::path log_path_;
  std::filesystem::path audio_root_;
  std::unordered_map<std::string, std::size_t> index_;

  mutable std::mutex mu_;
  std::unordered_map<std::string, std::set<std::string>> claims_;
  std::map<std::string, std::set<std::string>> submitted_;
  std::size_t submissions_ = 0;
  int log_fd_ = -1;
  int batch_fd_ = -1;
};

}  // namespace paraspeech

#endif  // PARASPEECH_ANNOTATION_HPP
