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

#ifndef PARASPEECH_METRICS_HPP
#define PARASPEECH_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <ranges>
#include <string>
#include <thread>
#include <vector>

#include "paraspeech/error.hpp"
#include "paraspeech/taxonomy.hpp"
#include "paraspeech/transcript.hpp"

namespace paraspeech {

/// Levenshtein distance with unit costs over any two random-access ranges
/// whose elements compare with ==. Uses two rolling rows.
template <std::ranges::random_access_range A, std::ranges::random_access_range B>
std::size_t edit_distance(const A& a, const B& b) {
  const std::size_t n = std::ranges::size(a);
  const std::size_t m = std::ranges::size(b);
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    const auto& ai = std::ranges::begin(a)[i - 1];
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (ai == std::ranges::begin(b)[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

inline std::size_t edit_distance(const TaggedTranscript& a, const TaggedTranscript& b) {
  return edit_distance(a.tokens, b.tokens);
}

struct UtterancePair {
  std::string id;
  TaggedTranscript reference;
  TaggedTranscript hypothesis;
};

enum class CerMode { Full, StripPara };
enum class DetectionMode { Category, Any };

struct ScoreOptions {
  DetectionMode detection = DetectionMode::Category;
  bool drop_punct = false;
  unsigned threads = 1;
};

/// Precision/recall/F1 from integer counts; every ratio is 0 on an empty denominator.
struct PrfCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double f1() const {
    double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  PrfCounts& operator+=(const PrfCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const PrfCounts&) const = default;
};

struct CategoryScore {
  std::string id;
  PrfCounts counts;
};

struct EventPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  PrfCounts total;
  std::vector<CategoryScore> per_category;
};

/// Pooled CER as an exact fraction.
struct CerTally {
  std::uint64_t errors = 0;
  std::uint64_t ref_length = 0;
  double ratio() const { return ref_length == 0 ? 0.0 : double(errors) / double(ref_length); }
};

struct ScoreReport {
  double cer_full = 0.0;
  double cer_wo_para = 0.0;
  double para_detection_rate = 0.0;
  double event_precision = 0.0;
  double event_recall = 0.0;
  double event_f1 = 0.0;
  std::vector<CategoryScore> per_category;

  std::uint64_t utterances = 0;
  std::uint64_t reference_characters = 0;
  std::uint64_t reference_characters_wo_para = 0;
  std::uint64_t reference_events = 0;
  std::uint64_t errors_full = 0;
  std::uint64_t errors_wo_para = 0;
  std::uint64_t tagged_references = 0;
  std::uint64_t detected = 0;
  PrfCounts event_counts;

  ScoreOptions options;
};

namespace detail {

inline TaggedTranscript scoring_view(const TaggedTranscript& tt, CerMode mode, bool drop_punct) {
  TaggedTranscript v = mode == CerMode::StripPara ? strip_tags(tt) : tt;
  return drop_punct ? drop_punctuation(v) : v;
}

inline std::vector<std::uint64_t> category_histogram(const TaggedTranscript& tt, std::size_t n_categories) {
  std::vector<std::uint64_t> h(n_categories, 0);
  for (const auto& tok : tt.tokens)
    if (tok.is_tag()) {
      if (tok.category >= n_categories) throw Error(ErrorKind::InvalidArgument, "tag outside taxonomy");
      ++h[tok.category];
    }
  return h;
}

inline std::size_t max_category(const std::vector<UtterancePair>& pairs) {
  std::size_t n = 0;
  for (const auto& p : pairs)
    for (const auto* side : {&p.reference, &p.hypothesis})
      for (const auto& tok : side->tokens)
        if (tok.is_tag()) n = std::max(n, tok.category + 1);
  return n;
}

inline bool detects(const TaggedTranscript& ref, const TaggedTranscript& hyp, DetectionMode mode) {
  if (mode == DetectionMode::Any) return tag_count(hyp) > 0;
  for (const auto& h : hyp.tokens) {
    if (!h.is_tag()) continue;
    for (const auto& r : ref.tokens)
      if (r.is_tag() && r.category == h.category) return true;
  }
  return false;
}

}  // namespace detail

inline CerTally cer_tally(const std::vector<UtterancePair>& pairs, CerMode mode, bool drop_punct = false) {
  CerTally tally;
  for (const auto& p : pairs) {
    auto ref = detail::scoring_view(p.reference, mode, drop_punct);
    if (ref.empty()) continue;
    auto hyp = detail::scoring_view(p.hypothesis, mode, drop_punct);
    tally.errors += edit_distance(ref, hyp);
    tally.ref_length += ref.size();
  }
  return tally;
}

/// Corpus CER: total edits over total reference length. References that are
/// empty under `mode` contribute to neither sum.
inline double cer(const std::vector<UtterancePair>& pairs, CerMode mode, bool drop_punct = false) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyReferenceCorpus, "no utterance pairs");
  CerTally t = cer_tally(pairs, mode, drop_punct);
  if (t.ref_length == 0) throw Error(ErrorKind::EmptyReferenceCorpus, "every reference is empty under the chosen mode");
  return t.ratio();
}

/// Fraction of tag-bearing references whose hypothesis carries a matching tag.
inline double para_detection(const std::vector<UtterancePair>& pairs,
                             DetectionMode mode = DetectionMode::Category) {
  std::uint64_t tagged = 0, hits = 0;
  for (const auto& p : pairs) {
    if (tag_count(p.reference) == 0) continue;
    ++tagged;
    hits += detail::detects(p.reference, p.hypothesis, mode);
  }
  if (tagged == 0) throw Error(ErrorKind::NoTaggedReference, "no reference contains a tag");
  return double(hits) / double(tagged);
}

/// Micro-averaged event P/R/F1 on per-utterance category multisets.
/// Pass the taxonomy to get a per-category row for every category.
inline EventPrf event_prf(const std::vector<UtterancePair>& pairs, const Taxonomy* taxonomy = nullptr) {
  const std::size_t n_cat = taxonomy ? taxonomy->size() : detail::max_category(pairs);
  std::vector<PrfCounts> per(n_cat);
  for (const auto& p : pairs) {
    auto ref = detail::category_histogram(p.reference, n_cat);
    auto hyp = detail::category_histogram(p.hypothesis, n_cat);
    for (std::size_t c = 0; c < n_cat; ++c) {
      std::uint64_t tp = std::min(ref[c], hyp[c]);
      per[c] += PrfCounts{tp, hyp[c] - tp, ref[c] - tp};
    }
  }
  EventPrf out;
  for (std::size_t c = 0; c < n_cat; ++c) {
    out.total += per[c];
    out.per_category.push_back({taxonomy ? (*taxonomy)[c].id : std::to_string(c), per[c]});
  }
  out.precision = out.total.precision();
  out.recall = out.total.recall();
  out.f1 = out.total.f1();
  return out;
}

/// Recall of requested events, used for synthesized speech: reference holds
/// the requested tags, hypothesis the tags recognized in the output audio.
inline double event_recall(const std::vector<UtterancePair>& pairs) { return event_prf(pairs).recall; }

inline ScoreReport score_corpus(const std::vector<UtterancePair>& pairs, const Taxonomy& taxonomy,
                                ScoreOptions options = {}) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyReferenceCorpus, "no utterance pairs");

  struct Row {
    std::uint64_t err_full = 0, len_full = 0, err_wo = 0, len_wo = 0, ref_events = 0;
    bool tagged = false, detected = false;
  };
  std::vector<Row> rows(pairs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = pairs[i];
      Row& r = rows[i];
      auto ref_full = detail::scoring_view(p.reference, CerMode::Full, options.drop_punct);
      if (!ref_full.empty()) {
        r.err_full = edit_distance(ref_full, detail::scoring_view(p.hypothesis, CerMode::Full, options.drop_punct));
        r.len_full = ref_full.size();
      }
      auto ref_wo = detail::scoring_view(p.reference, CerMode::StripPara, options.drop_punct);
      if (!ref_wo.empty()) {
        r.err_wo = edit_distance(ref_wo, detail::scoring_view(p.hypothesis, CerMode::StripPara, options.drop_punct));
        r.len_wo = ref_wo.size();
      }
      r.ref_events = tag_count(p.reference);
      r.tagged = r.ref_events > 0;
      r.detected = r.tagged && detail::detects(p.reference, p.hypothesis, options.detection);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, unsigned(pairs.size())));
  if (threads == 1) {
    work(0, pairs.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (pairs.size() + threads - 1) / threads;
    for (std::size_t b = 0; b < pairs.size(); b += chunk)
      pool.emplace_back(work, b, std::min(pairs.size(), b + chunk));
  }

  ScoreReport rep;
  rep.options = options;
  rep.utterances = pairs.size();
  for (const auto& r : rows) {
    rep.errors_full += r.err_full;
    rep.reference_characters += r.len_full;
    rep.errors_wo_para += r.err_wo;
    rep.reference_characters_wo_para += r.len_wo;
    rep.reference_events += r.ref_events;
    rep.tagged_references += r.tagged;
    rep.detected += r.detected;
  }
  if (rep.reference_characters == 0)
    throw Error(ErrorKind::EmptyReferenceCorpus, "every reference is empty");
  if (rep.reference_characters_wo_para == 0)
    throw Error(ErrorKind::EmptyReferenceCorpus, "every reference is empty once tags are removed");
  if (rep.tagged_references == 0) throw Error(ErrorKind::NoTaggedReference, "no reference contains a tag");

  rep.cer_full = double(rep.errors_full) / double(rep.reference_characters);
  rep.cer_wo_para = double(rep.errors_wo_para) / double(rep.reference_characters_wo_para);
  rep.para_detection_rate = double(rep.detected) / double(rep.tagged_references);

  EventPrf ev = event_prf(pairs, &taxonomy);
  rep.event_counts = ev.total;
  rep.event_precision = ev.precision;
  rep.event_recall = ev.recall;
  rep.event_f1 = ev.f1;
  rep.per_category = std::move(ev.per_category);
  return rep;
}

// ---------------------------------------------------------------------------
// Utterance-level tag vectors (tagging task, annotation agreement, BCE).

/// Dense per-category weights in taxonomy order.
struct TagVector {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool is_binary() const {
    return std::ranges::all_of(values, [](double v) { return v == 0.0 || v == 1.0; });
  }
};

inline TagVector presence_vector(const TaggedTranscript& tt, std::size_t n_categories) {
  TagVector v{std::vector<double>(n_categories, 0.0)};
  for (const auto& tok : tt.tokens)
    if (tok.is_tag() && tok.category < n_categories) v.values[tok.category] = 1.0;
  return v;
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  PrfCounts counts;
};

/// Micro P/R/F1 over all (utterance, category) cells; a hypothesis cell is
/// positive when its weight is at least `threshold`.
inline Prf multilabel_prf(const std::vector<TagVector>& refs, const std::vector<TagVector>& hyps, double threshold = 0.5) {
  if (refs.size() != hyps.size())
    throw Error(ErrorKind::DimensionMismatch, std::to_string(refs.size()) + " references vs " + std::to_string(hyps.size()) + " hypotheses");
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorKind::InvalidArgument, "threshold must lie in (0,1)");
  PrfCounts c;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].size() != hyps[i].size())
      throw Error(ErrorKind::DimensionMismatch, "vector " + std::to_string(i) + " differs in dimension");
    if (!refs[i].is_binary()) throw Error(ErrorKind::InvalidArgument, "reference vector " + std::to_string(i) + " is not binary");
    for (std::size_t k = 0; k < refs[i].size(); ++k) {
      bool truth = refs[i].values[k] == 1.0;
      bool pred = hyps[i].values[k] >= threshold;
      c.tp += truth && pred;
      c.fp += !truth && pred;
      c.fn += truth && !pred;
    }
  }
  return {c.precision(), c.recall(), c.f1(), c};
}

inline constexpr double kBceEpsilon = 1e-12;

/// Summed binary cross-entropy over categories, predictions clamped to [eps, 1-eps].
inline double bce_loss(const TagVector& ref, const TagVector& hyp) {
  if (ref.size() != hyp.size())
    throw Error(ErrorKind::DimensionMismatch, std::to_string(ref.size()) + " vs " + std::to_string(hyp.size()));
  double loss = 0.0;
  for (std::size_t c = 0; c < ref.size(); ++c) {
    const double y = ref.values[c];
    const double p = std::clamp(hyp.values[c], kBceEpsilon, 1.0 - kBceEpsilon);
    loss -= y * std::log(p) + (1.0 - y) * std::log1p(-p);
  }
  return loss;
}

/// 2x2 presence table for one category: both marked (a), only first (b),
/// only second (c), neither (d).
struct AgreementTable {
  std::uint64_t a = 0, b = 0, c = 0, d = 0;

  std::uint64_t n() const { return a + b + c + d; }

  double kappa() const {
    const double nn = double(n());
    if (nn == 0) return 1.0;
    const double po = double(a + d) / nn;
    const double pe = (double(a + b) * double(a + c) + double(c + d) * double(b + d)) / (nn * nn);
    if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
    return (po - pe) / (1.0 - pe);
  }
};

struct KappaReport {
  std::vector<AgreementTable> tables;
  std::vector<double> per_category;
  double macro = 1.0;
  // Categories included in the macro mean (marked by at least one annotator).
  std::vector<std::size_t> active;
};

/// Per-category Cohen's kappa on presence bits; macro mean over categories
/// that either annotator marked at least once (1.0 if none were).
inline KappaReport cohen_kappa(const std::vector<TagVector>& first, const std::vector<TagVector>& second) {
  if (first.size() != second.size())
    throw Error(ErrorKind::LengthMismatch, std::to_string(first.size()) + " vs " + std::to_string(second.size()) + " annotations");
  if (first.empty()) throw Error(ErrorKind::LengthMismatch, "no annotations to compare");
  const std::size_t n_cat = first.front().size();
  KappaReport rep;
  rep.tables.resize(n_cat);
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].size() != n_cat || second[i].size() != n_cat)
      throw Error(ErrorKind::DimensionMismatch, "annotation " + std::to_string(i) + " differs in dimension");
    if (!first[i].is_binary() || !second[i].is_binary())
      throw Error(ErrorKind::InvalidArgument, "annotation " + std::to_string(i) + " is not binary");
    for (std::size_t k = 0; k < n_cat; ++k) {
      bool x = first[i].values[k] == 1.0, y = second[i].values[k] == 1.0;
      auto& t = rep.tables[k];
      if (x && y) ++t.a;
      else if (x) ++t.b;
      else if (y) ++t.c;
      else ++t.d;
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n_cat; ++k) {
    rep.per_category.push_back(rep.tables[k].kappa());
    if (rep.tables[k].a + rep.tables[k].b + rep.tables[k].c > 0) {
      rep.active.push_back(k);
      sum += rep.per_category.back();
    }
  }
  if (!rep.active.empty()) rep.macro = sum / double(rep.active.size());
  return rep;
}

}  // namespace paraspeech

#endif  // PARASPEECH_METRICS_HPP
