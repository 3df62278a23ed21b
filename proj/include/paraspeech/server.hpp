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

#ifndef PARASPEECH_SERVER_HPP
#define PARASPEECH_SERVER_HPP

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "paraspeech/annotation.hpp"
#include "paraspeech/taxonomy.hpp"
#include "paraspeech/version.hpp"

namespace paraspeech {

inline constexpr const char* kDefaultGuidelines =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>Annotation guidelines</title></head>"
    "<body><h1>Annotation guidelines</h1><p>No guidelines were configured for this service. "
    "Start the server with --guidelines FILE to publish them here.</p></body></html>";

namespace detail {

/// Grammar vectors the browser client replays against its own parser.
inline nlohmann::ordered_json conformance_vectors(const Taxonomy& t) {
  const std::string s0 = t[0].surface;
  nlohmann::ordered_json v = nlohmann::ordered_json::array();
  v.push_back({{"input", "你好" + s0}, {"ok", true}, {"canonical", "你好" + s0}});
  v.push_back({{"input", s0 + " 好 "}, {"ok", true}, {"canonical", s0 + "好"}});
  v.push_back({{"input", "你好[" }, {"ok", false}, {"error", "UnbalancedBracket"}, {"byte_offset", 6}});
  v.push_back({{"input", "你好]"}, {"ok", false}, {"error", "UnbalancedBracket"}, {"byte_offset", 6}});
  v.push_back({{"input", "[" + s0}, {"ok", false}, {"error", "UnbalancedBracket"}, {"byte_offset", 0}});
  v.push_back({{"input", "你好" + t.none_surface()}, {"ok", false}, {"error", "UnknownTag"}, {"byte_offset", 6}});
  v.push_back({{"input", ""}, {"ok", true}, {"canonical", ""}});
  return v;
}

inline void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

inline void send_error(httplib::Response& res, int status, ErrorKind kind, const std::string& message) {
  send_json(res, status, {{"error", to_string(kind)}, {"message", message}});
}

inline std::string content_type_for(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  if (ext == ".wav") return "audio/wav";
  if (ext == ".flac") return "audio/flac";
  if (ext == ".mp3") return "audio/mpeg";
  if (ext == ".ogg" || ext == ".opus") return "audio/ogg";
  return "application/octet-stream";
}

}  // namespace detail

/// Registers the annotation endpoints on `server`. The store must outlive it.
inline void mount_annotation_routes(httplib::Server& server, AnnotationStore& store, std::string guidelines_html = {}) {
  if (guidelines_html.empty()) guidelines_html = kDefaultGuidelines;

  server.Get("/taxonomy", [&store](const httplib::Request&, httplib::Response& res) {
    auto body = to_config(store.taxonomy());
    nlohmann::ordered_json out(body);
    out["conformance"] = detail::conformance_vectors(store.taxonomy());
    detail::send_json(res, 200, out);
  });

  server.Get("/batch", [&store](const httplib::Request& req, httplib::Response& res) {
    const std::string annotator = req.get_param_value("annotator");
    if (annotator.empty()) return detail::send_error(res, 400, ErrorKind::InvalidArgument, "query parameter annotator is required");
    std::size_t n = 10;
    if (req.has_param("n")) {
      char* end = nullptr;
      const std::string raw = req.get_param_value("n");
      long v = std::strtol(raw.c_str(), &end, 10);
      if (raw.empty() || *end != '\0' || v <= 0) return detail::send_error(res, 400, ErrorKind::InvalidArgument, "n must be a positive integer");
      n = static_cast<std::size_t>(v);
    }
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const auto& r : store.batch(annotator, n)) records.push_back(to_json(r));
    detail::send_json(res, 200, {{"annotator", annotator}, {"records", std::move(records)}});
  });

  server.Get(R"(/audio/(.+))", [&store](const httplib::Request& req, httplib::Response& res) {
    auto path = store.audio_path(req.matches[1]);
    if (!path) return detail::send_error(res, 404, ErrorKind::UnknownRecord, "unknown record \"" + std::string(req.matches[1]) + "\"");
    std::ifstream in(*path, std::ios::binary);
    if (!in) return detail::send_error(res, 404, ErrorKind::Io, "audio file missing for record");
    std::ostringstream buf;
    buf << in.rdbuf();
    res.status = 200;
    res.set_content(buf.str(), detail::content_type_for(*path));
  });

  server.Post("/annotation", [&store](const httplib::Request& req, httplib::Response& res) {
    AnnotationSubmission sub;
    try {
      sub = submission_from_json(nlohmann::json::parse(req.body));
    } catch (const std::exception& e) {
      return detail::send_error(res, 400, ErrorKind::MalformedRecord, e.what());
    }
    auto outcome = store.submit(std::move(sub));
    if (auto* ok = std::get_if<Acceptance>(&outcome)) {
      return detail::send_json(res, 201, {{"status", "accepted"}, {"transcript", ok->transcript}, {"sequence", ok->sequence}});
    }
    const auto& rej = std::get<Rejection>(outcome);
    nlohmann::ordered_json body{{"error", to_string(rej.kind)}, {"message", rej.message}};
    if (rej.byte_offset) body["byte_offset"] = *rej.byte_offset;
    if (rej.surface) body["surface"] = *rej.surface;
    detail::send_json(res, rej.kind == ErrorKind::UnknownRecord ? 404 : 422, body);
  });

  server.Get("/progress", [&store](const httplib::Request&, httplib::Response& res) {
    detail::send_json(res, 200, store.progress());
  });

  server.Get("/guidelines", [html = std::move(guidelines_html)](const httplib::Request&, httplib::Response& res) {
    res.set_content(html, "text/html; charset=utf-8");
  });

  server.Get("/version", [](const httplib::Request&, httplib::Response& res) {
    detail::send_json(res, 200, {{"toolkit_version", kToolkitVersion}});
  });
}

}  // namespace paraspeech

#endif  // PARASPEECH_SERVER_HPP
