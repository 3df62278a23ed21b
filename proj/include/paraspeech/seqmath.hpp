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

#ifndef PARASPEECH_SEQMATH_HPP
#define PARASPEECH_SEQMATH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "paraspeech/error.hpp"

namespace paraspeech {

using Symbol = std::size_t;

/// Row-major T x V matrix of per-frame symbol probabilities. Rows must be
/// distributions (sum to 1 within kRowTolerance).
class ProbMatrix {
 public:
  static constexpr double kRowTolerance = 1e-9;

  ProbMatrix(std::size_t frames, std::size_t symbols, Symbol blank, std::vector<double> values)
      : frames_(frames), symbols_(symbols), blank_(blank), values_(std::move(values)) {
    if (symbols_ == 0) throw Error(ErrorKind::MalformedMatrix, "vocabulary is empty");
    if (blank_ >= symbols_) throw Error(ErrorKind::MalformedMatrix, "blank index out of range");
    if (values_.size() != frames_ * symbols_)
      throw Error(ErrorKind::MalformedMatrix, "expected " + std::to_string(frames_ * symbols_) + " entries, got " +
                                                  std::to_string(values_.size()));
    for (std::size_t t = 0; t < frames_; ++t) {
      double sum = 0.0;
      for (double p : row(t)) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::MalformedMatrix, "frame " + std::to_string(t) + " has an entry outside [0,1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowTolerance)
        throw Error(ErrorKind::MalformedMatrix, "frame " + std::to_string(t) + " sums to " + std::to_string(sum));
    }
  }

  std::size_t frames() const noexcept { return frames_; }
  std::size_t symbols() const noexcept { return symbols_; }
  Symbol blank() const noexcept { return blank_; }
  double operator()(std::size_t t, Symbol s) const { return values_[t * symbols_ + s]; }
  std::span<const double> row(std::size_t t) const { return {values_.data() + t * symbols_, symbols_}; }

 private:
  std::size_t frames_;
  std::size_t symbols_;
  Symbol blank_;
  std::vector<double> values_;
};

/// Plain-text matrix: "T V blank" header, then T rows of V decimals.
inline ProbMatrix read_prob_matrix(std::istream& in) {
  std::size_t t = 0, v = 0, blank = 0;
  if (!(in >> t >> v >> blank)) throw Error(ErrorKind::MalformedMatrix, "missing \"T V blank\" header");
  std::vector<double> values(t * v);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(in >> values[i])) throw Error(ErrorKind::MalformedMatrix, "expected " + std::to_string(t * v) + " values, got " + std::to_string(i));
  double extra;
  if (in >> extra) throw Error(ErrorKind::MalformedMatrix, "trailing values after the last frame");
  return ProbMatrix(t, v, blank, std::move(values));
}

inline std::string write_prob_matrix(const ProbMatrix& p) {
  std::ostringstream out;
  out.precision(17);
  out << p.frames() << ' ' << p.symbols() << ' ' << p.blank() << '\n';
  for (std::size_t t = 0; t < p.frames(); ++t) {
    for (std::size_t s = 0; s < p.symbols(); ++s) out << (s ? " " : "") << p(t, s);
    out << '\n';
  }
  return out.str();
}

/// A negative log-likelihood; `infinite` marks targets with zero probability
/// (value is then +inf).
struct NegLogLikelihood {
  double value = 0.0;
  bool infinite = false;

  static NegLogLikelihood infeasible() { return {std::numeric_limits<double>::infinity(), true}; }
};

/// CTC collapse: merge adjacent repeats, then remove blanks.
inline std::vector<Symbol> ctc_collapse(std::span<const Symbol> path, Symbol blank) {
  std::vector<Symbol> out;
  std::optional<Symbol> prev;
  for (Symbol s : path) {
    if (s != blank && s != prev) out.push_back(s);
    prev = s;
  }
  return out;
}

/// Fewest frames that can emit `labels`: one per label plus a blank between
/// each adjacent repeated pair.
inline std::size_t ctc_min_frames(std::span<const Symbol> labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i) n += labels[i] == labels[i - 1];
  return n;
}

namespace detail {

inline double log_add(double a, double b) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace detail

/// -log P(labels | p) summed over every alignment that collapses to `labels`,
/// via the forward recursion over the blank-interleaved label sequence in
/// log space.
inline NegLogLikelihood ctc_loss(const ProbMatrix& p, std::span<const Symbol> labels) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const Symbol blank = p.blank();
  for (Symbol s : labels)
    if (s >= p.symbols() || s == blank)
      throw Error(ErrorKind::InvalidArgument, "label " + std::to_string(s) + " is out of range or blank");
  if (ctc_min_frames(labels) > p.frames()) return NegLogLikelihood::infeasible();
  if (p.frames() == 0) return {0.0, false};

  // Extended sequence: blank, l1, blank, l2, ..., lL, blank.
  const std::size_t S = 2 * labels.size() + 1;
  auto sym = [&](std::size_t s) { return s % 2 == 0 ? blank : labels[s / 2]; };
  auto logp = [&](std::size_t t, Symbol k) {
    double v = p(t, k);
    return v > 0.0 ? std::log(v) : kNegInf;
  };

  std::vector<double> alpha(S, kNegInf), next(S);
  alpha[0] = logp(0, blank);
  if (S > 1) alpha[1] = logp(0, sym(1));
  for (std::size_t t = 1; t < p.frames(); ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = alpha[s];
      if (s >= 1) acc = detail::log_add(acc, alpha[s - 1]);
      if (s >= 2 && sym(s) != blank && sym(s) != sym(s - 2)) acc = detail::log_add(acc, alpha[s - 2]);
      next[s] = acc == kNegInf ? kNegInf : acc + logp(t, sym(s));
    }
    std::swap(alpha, next);
  }
  double total = alpha[S - 1];
  if (S > 1) total = detail::log_add(total, alpha[S - 2]);
  if (total == kNegInf) return NegLogLikelihood::infeasible();
  return {-total, false};
}

/// Exhaustive reference: enumerates all V^T alignment paths. Only usable on
/// tiny inputs; `max_paths` guards against accidental blowup.
inline NegLogLikelihood ctc_loss_enumerate(const ProbMatrix& p, std::span<const Symbol> labels,
                                           std::size_t max_paths = std::size_t(1) << 22) {
  const std::size_t T = p.frames(), V = p.symbols();
  double count = std::pow(double(V), double(T));
  if (count > double(max_paths)) throw Error(ErrorKind::InvalidArgument, "too many paths to enumerate");
  std::vector<Symbol> path(T, 0);
  const std::vector<Symbol> target(labels.begin(), labels.end());
  double total = 0.0;
  for (;;) {
    if (ctc_collapse(path, p.blank()) == target) {
      double prob = 1.0;
      for (std::size_t t = 0; t < T; ++t) prob *= p(t, path[t]);
      total += prob;
    }
    std::size_t t = 0;
    while (t < T && ++path[t] == V) path[t++] = 0;
    if (t == T) break;
  }
  if (total == 0.0) return NegLogLikelihood::infeasible();
  return {-std::log(total), false};
}

/// Per-frame argmax (lowest index wins ties) followed by collapse.
inline std::vector<Symbol> ctc_greedy_decode(const ProbMatrix& p) {
  std::vector<Symbol> path(p.frames());
  for (std::size_t t = 0; t < p.frames(); ++t) {
    auto r = p.row(t);
    path[t] = static_cast<Symbol>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return ctc_collapse(path, p.blank());
}

// ---------------------------------------------------------------------------
// Continuous integrate-and-fire.

struct CifFrame {
  double weight = 0.0;
  std::vector<double> hidden;
};

struct CifOptions {
  double threshold = 1.0;
  // When set, weights are rescaled so exactly this many segments fire.
  std::optional<std::size_t> scale_to;
};

struct CifResult {
  std::vector<std::vector<double>> segments;
  // Weights actually integrated (after any rescaling).
  std::vector<double> weights;
  // Mass left in the accumulator when the input ran out.
  double residual = 0.0;
};

/// Accumulates frame weights left to right. When the running total reaches
/// the threshold, the crossing frame's weight is split: the part that fills
/// the threshold closes the current segment, the remainder opens the next.
/// Each segment is the weight-averaged hidden state, sum(w_t * h_t) / threshold.
inline CifResult cif_segment(std::span<const CifFrame> frames, CifOptions opt = {}) {
  if (!(opt.threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be positive");
  const std::size_t dim = frames.empty() ? 0 : frames.front().hidden.size();
  CifResult out;
  out.weights.reserve(frames.size());
  double total = 0.0;
  for (const auto& f : frames) {
    if (!(f.weight >= 0.0 && f.weight <= 1.0)) throw Error(ErrorKind::InvalidArgument, "frame weight outside [0,1]");
    if (f.hidden.size() != dim) throw Error(ErrorKind::DimensionMismatch, "frames disagree on hidden size");
    total += f.weight;
    out.weights.push_back(f.weight);
  }
  if (opt.scale_to) {
    if (!(total > 0.0)) throw Error(ErrorKind::ZeroTotalWeight, "cannot rescale weights that sum to zero");
    const double scale = double(*opt.scale_to) * opt.threshold / total;
    for (double& w : out.weights) w *= scale;
  }

  std::vector<double> acc_vec(dim, 0.0);
  double acc = 0.0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& h = frames[t].hidden;
    double w = out.weights[t];
    while (acc + w >= opt.threshold) {
      const double used = opt.threshold - acc;
      for (std::size_t k = 0; k < dim; ++k) acc_vec[k] = (acc_vec[k] + used * h[k]) / opt.threshold;
      out.segments.push_back(std::move(acc_vec));
      acc_vec.assign(dim, 0.0);
      w -= used;
      acc = 0.0;
    }
    acc += w;
    for (std::size_t k = 0; k < dim; ++k) acc_vec[k] += w * h[k];
  }
  // Rounding can leave the last scheduled segment a hair short of the threshold.
  if (opt.scale_to && out.segments.size() < *opt.scale_to && acc > 0.5 * opt.threshold) {
    for (auto& x : acc_vec) x /= opt.threshold;
    out.segments.push_back(std::move(acc_vec));
    acc = 0.0;
  }
  out.residual = acc;
  return out;
}

/// Autoregressive sequence NLL: -sum_t log P(y_t | steps[t]).
inline NegLogLikelihood sequence_nll(const std::vector<std::vector<double>>& step_probs, std::span<const Symbol> targets) {
  if (step_probs.size() != targets.size())
    throw Error(ErrorKind::LengthMismatch, std::to_string(step_probs.size()) + " steps vs " + std::to_string(targets.size()) + " targets");
  double nll = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] >= step_probs[t].size()) throw Error(ErrorKind::InvalidArgument, "target index outside step distribution");
    const double p = step_probs[t][targets[t]];
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "step probability outside [0,1]");
    if (p == 0.0) return NegLogLikelihood::infeasible();
    nll -= std::log(p);
  }
  return {nll, false};
}

}  // namespace paraspeech

#endif  // PARASPEECH_SEQMATH_HPP
