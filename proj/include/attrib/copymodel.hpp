// Copyright 2026 The Attrib Authors.
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

#ifndef ATTRIB_COPYMODEL_HPP_
#define ATTRIB_COPYMODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "attrib/corpus.hpp"
#include "attrib/rng.hpp"

namespace attrib {

// Smoothed character n-gram language model. Its parameters are one flat
// vector of log-probabilities, which makes convex weight-space interpolation
// between a reference model and a target-mimicking copy model literal, and
// sampling from any interpolant cheap.
//
// Symbols are the configured alphabet plus one boundary symbol (index
// alphabet_size) that acts as begin-of-text in contexts and end-of-text as a
// prediction target. Characters outside the alphabet are dropped.
//
// Flattening order: rows are contexts of length order-1 in lexicographic
// order of their symbol indices; within a row, entries follow symbol index
// order (alphabet order, boundary last). Row r spans
// parameters()[r * num_symbols() .. (r+1) * num_symbols()).
class NgramLM {
 public:
  NgramLM() = default;
  NgramLM(int order, std::string alphabet, double smoothing);

  int order() const { return order_; }
  const std::string& alphabet() const { return alphabet_; }
  double smoothing() const { return smoothing_; }
  size_t num_symbols() const { return alphabet_.size() + 1; }
  size_t num_contexts() const;
  size_t boundary_symbol() const { return alphabet_.size(); }

  // Flat log-probability vector; each row exponentiates and sums to 1.
  const std::vector<double>& parameters() const { return log_probs_; }
  std::vector<double>& mutable_parameters() { return log_probs_; }

  double log_prob(size_t context_row, size_t symbol) const {
    return log_probs_[context_row * num_symbols() + symbol];
  }

  // Symbol index for a character, or npos when outside the alphabet.
  size_t symbol_index(char c) const;

  static constexpr size_t npos = static_cast<size_t>(-1);

  // Default alphabet: printable ASCII (0x20..0x7E) plus newline.
  static std::string printable_ascii_alphabet();

 private:
  int order_ = 0;
  std::string alphabet_;
  std::vector<size_t> char_to_symbol_;  // 256-entry lookup
  double smoothing_ = 0.0;
  std::vector<double> log_probs_;

  friend NgramLM train_copy(const std::vector<std::string>&, int, double, std::string);
  friend NgramLM interpolate(const NgramLM&, const NgramLM&, double);
  friend NgramLM load_ngram_lm(const std::string&);
  void rebuild_lookup();
};

// Additive-smoothing maximum likelihood fit:
//   P(s | ctx) = (count(ctx, s) + k) / (count(ctx, *) + k * num_symbols).
// Contexts start as boundary^(order-1); counted events are the transitions
// within each text, so the end-of-text column holds smoothing mass only.
// Throws if order < 1 or responses is empty.
NgramLM train_copy(const std::vector<std::string>& responses, int order,
                   double smoothing,
                   std::string alphabet = NgramLM::printable_ascii_alphabet());

// Convex combination per row in probability space, then renormalized (a
// no-op up to rounding, since convexity preserves the simplex). alpha == 0
// and alpha == 1 return the endpoint parameters bitwise. Throws on
// order/alphabet mismatch or alpha outside [0, 1].
NgramLM interpolate(const NgramLM& init, const NgramLM& copy, double alpha);

struct SampleConfig {
  size_t max_len = 512;       // in alphabet symbols, excluding end-of-text
  double temperature = 1.0;   // logits scaled by 1/temperature

  // When synthesizing triplets, cap each sample at the paired target
  // response's symbol count (still bounded by max_len). Keeps synthetic
  // negatives on the corpus length scale so they differ by style, not by a
  // length artifact.
  bool match_target_length = true;
};

// Ancestral sampling from the begin-of-text context until end-of-text or
// max_len symbols. The sampled distribution does not depend on any query;
// callers that want query-conditioned draws seed the rng stream per query
// (see synth_triplets).
std::string sample(const NgramLM& lm, SplitMix64& rng, const SampleConfig& config = {});

// exp of the mean per-symbol negative log-likelihood over the texts'
// alphabet symbols (matching the training event convention).
double perplexity(const NgramLM& lm, const std::vector<std::string>& texts);

// One TripletExample per pair, with y_alpha sampled from lm_alpha. The rng
// stream for a pair is seeded with fnv1a64(query_id) ^ run_seed, so triplets
// are reproducible per query and independent across queries.
std::vector<TripletExample> synth_triplets(const std::vector<PreferencePair>& pairs,
                                           const NgramLM& lm_alpha, uint64_t run_seed,
                                           const SampleConfig& config = {});

// Model file: versioned binary with order, alphabet, smoothing and the flat
// parameter vector (little-endian IEEE doubles).
void save_ngram_lm(const NgramLM& lm, const std::string& path);
NgramLM load_ngram_lm(const std::string& path);

}  // namespace attrib

#endif  // ATTRIB_COPYMODEL_HPP_
