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

#include "attrib/copymodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace attrib {

namespace {

constexpr char kMagic[8] = {'A', 'T', 'N', 'G', 'L', 'M', '0', '1'};
constexpr size_t kMaxParameters = 200'000'000;

size_t checked_context_count(int order, size_t num_symbols) {
  size_t contexts = 1;
  for (int i = 1; i < order; ++i) {
    if (contexts > kMaxParameters / num_symbols) {
      throw std::invalid_argument("n-gram parameter table too large for this order/alphabet");
    }
    contexts *= num_symbols;
  }
  if (contexts > kMaxParameters / num_symbols) {
    throw std::invalid_argument("n-gram parameter table too large for this order/alphabet");
  }
  return contexts;
}

// Maps a text to symbol indices, dropping out-of-alphabet characters.
std::vector<size_t> to_symbols(const NgramLM& lm, std::string_view text) {
  std::vector<size_t> symbols;
  symbols.reserve(text.size());
  for (const char c : text) {
    const size_t s = lm.symbol_index(c);
    if (s != NgramLM::npos) symbols.push_back(s);
  }
  return symbols;
}

}  // namespace

NgramLM::NgramLM(int order, std::string alphabet, double smoothing)
    : order_(order), alphabet_(std::move(alphabet)), smoothing_(smoothing) {
  if (order_ < 1) throw std::invalid_argument("n-gram order must be >= 1");
  if (alphabet_.empty()) throw std::invalid_argument("alphabet must be non-empty");
  if (smoothing_ <= 0.0) throw std::invalid_argument("smoothing constant must be > 0");
  const size_t contexts = checked_context_count(order_, num_symbols());
  log_probs_.assign(contexts * num_symbols(), 0.0);
  rebuild_lookup();
}

void NgramLM::rebuild_lookup() {
  char_to_symbol_.assign(256, npos);
  for (size_t i = 0; i < alphabet_.size(); ++i) {
    char_to_symbol_[static_cast<unsigned char>(alphabet_[i])] = i;
  }
}

size_t NgramLM::num_contexts() const {
  size_t contexts = 1;
  for (int i = 1; i < order_; ++i) contexts *= num_symbols();
  return contexts;
}

size_t NgramLM::symbol_index(char c) const {
  return char_to_symbol_[static_cast<unsigned char>(c)];
}

std::string NgramLM::printable_ascii_alphabet() {
  std::string a;
  for (char c = 0x20; c <= 0x7E; ++c) a.push_back(c);
  a.push_back('\n');
  return a;
}

NgramLM train_copy(const std::vector<std::string>& responses, int order, double smoothing,
                   std::string alphabet) {
  if (responses.empty()) throw std::invalid_argument("train_copy: no responses");
  NgramLM lm(order, std::move(alphabet), smoothing);
  const size_t symbols = lm.num_symbols();
  const size_t boundary = lm.boundary_symbol();
  const size_t context_stride = lm.num_contexts() / (order > 1 ? symbols : 1);

  std::vector<double> counts(lm.log_probs_.size(), 0.0);
  std::vector<double> totals(lm.num_contexts(), 0.0);

  // Begin-of-text context: order-1 boundary symbols.
  size_t start_row = 0;
  for (int i = 1; i < order; ++i) start_row = start_row * symbols + boundary;

  // Only transitions within the text are counted; the end-of-text column
  // carries smoothing mass alone, so single-symbol corpora concentrate all
  // probability on that symbol as k -> 0.
  for (const auto& text : responses) {
    const std::vector<size_t> seq = to_symbols(lm, text);
    size_t row = start_row;
    for (const size_t s : seq) {
      counts[row * symbols + s] += 1.0;
      totals[row] += 1.0;
      if (order > 1) row = (row % context_stride) * symbols + s;
    }
  }

  const double prior_total = smoothing * static_cast<double>(symbols);
  for (size_t row = 0; row < lm.num_contexts(); ++row) {
    const double denom = totals[row] + prior_total;
    for (size_t s = 0; s < symbols; ++s) {
      lm.log_probs_[row * symbols + s] = std::log((counts[row * symbols + s] + smoothing) / denom);
    }
  }
  return lm;
}

NgramLM interpolate(const NgramLM& init, const NgramLM& copy, double alpha) {
  if (init.order() != copy.order() || init.alphabet() != copy.alphabet() ||
      init.parameters().size() != copy.parameters().size()) {
    throw std::invalid_argument("interpolate: model shapes differ");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("interpolate: alpha must be in [0, 1]");
  }
  if (alpha == 0.0) return init;
  if (alpha == 1.0) return copy;

  NgramLM out(init.order(), init.alphabet(), (1.0 - alpha) * init.smoothing() + alpha * copy.smoothing());
  const size_t symbols = out.num_symbols();
  std::vector<double> row(symbols);
  for (size_t r = 0; r < out.num_contexts(); ++r) {
    double sum = 0.0;
    for (size_t s = 0; s < symbols; ++s) {
      const size_t i = r * symbols + s;
      row[s] = (1.0 - alpha) * std::exp(init.parameters()[i]) +
               alpha * std::exp(copy.parameters()[i]);
      sum += row[s];
    }
    for (size_t s = 0; s < symbols; ++s) {
      out.log_probs_[r * symbols + s] = std::log(row[s] / sum);
    }
  }
  return out;
}

std::string sample(const NgramLM& lm, SplitMix64& rng, const SampleConfig& config) {
  if (config.max_len < 1) throw std::invalid_argument("sample: max_len must be >= 1");
  const size_t symbols = lm.num_symbols();
  const size_t boundary = lm.boundary_symbol();
  const int order = lm.order();
  const size_t context_stride = lm.num_contexts() / (order > 1 ? symbols : 1);

  size_t row = 0;
  for (int i = 1; i < order; ++i) row = row * symbols + boundary;

  std::string out;
  std::vector<double> probs(symbols);
  const double inv_temp = 1.0 / config.temperature;
  while (out.size() < config.max_len) {
    double sum = 0.0;
    for (size_t s = 0; s < symbols; ++s) {
      probs[s] = std::exp(lm.log_prob(row, s) * inv_temp);
      sum += probs[s];
    }
    const double u = rng.next_double() * sum;
    double acc = 0.0;
    size_t pick = symbols - 1;
    for (size_t s = 0; s < symbols; ++s) {
      acc += probs[s];
      if (u < acc) {
        pick = s;
        break;
      }
    }
    if (pick == boundary) break;
    out.push_back(lm.alphabet()[pick]);
    if (order > 1) row = (row % context_stride) * symbols + pick;
  }
  return out;
}

double perplexity(const NgramLM& lm, const std::vector<std::string>& texts) {
  if (texts.empty()) throw std::invalid_argument("perplexity: no texts");
  const size_t symbols = lm.num_symbols();
  const size_t boundary = lm.boundary_symbol();
  const int order = lm.order();
  const size_t context_stride = lm.num_contexts() / (order > 1 ? symbols : 1);

  size_t start_row = 0;
  for (int i = 1; i < order; ++i) start_row = start_row * symbols + boundary;

  double total_nll = 0.0;
  size_t events = 0;
  for (const auto& text : texts) {
    const std::vector<size_t> seq = to_symbols(lm, text);
    size_t row = start_row;
    for (const size_t s : seq) {
      total_nll -= lm.log_prob(row, s);
      ++events;
      if (order > 1) row = (row % context_stride) * symbols + s;
    }
  }
  if (events == 0) throw std::invalid_argument("perplexity: texts contain no alphabet symbols");
  return std::exp(total_nll / static_cast<double>(events));
}

std::vector<TripletExample> synth_triplets(const std::vector<PreferencePair>& pairs,
                                           const NgramLM& lm_alpha, uint64_t run_seed,
                                           const SampleConfig& config) {
  std::vector<TripletExample> triplets;
  triplets.reserve(pairs.size());
  for (const auto& pair : pairs) {
    SplitMix64 rng(fnv1a64(pair.query_id) ^ run_seed);
    SampleConfig pair_config = config;
    if (config.match_target_length) {
      const size_t target_len = to_symbols(lm_alpha, pair.y_star).size();
      pair_config.max_len = std::max<size_t>(1, std::min(config.max_len, target_len));
    }
    TripletExample t;
    t.query_id = pair.query_id;
    t.query = pair.query;
    t.y_star = pair.y_star;
    t.y_alpha = sample(lm_alpha, rng, pair_config);
    t.y_o = pair.y_o;
    t.assigned_task = TaskKind::kTriplet;
    triplets.push_back(std::move(t));
  }
  return triplets;
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

// Little-endian layout: magic, u32 order, u32 alphabet length, alphabet
// bytes, f64 smoothing, u64 parameter count, raw f64 parameters.
void save_ngram_lm(const NgramLM& lm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, static_cast<uint32_t>(lm.order()));
  write_raw(out, static_cast<uint32_t>(lm.alphabet().size()));
  out.write(lm.alphabet().data(), static_cast<std::streamsize>(lm.alphabet().size()));
  write_raw(out, lm.smoothing());
  write_raw(out, static_cast<uint64_t>(lm.parameters().size()));
  out.write(reinterpret_cast<const char*>(lm.parameters().data()),
            static_cast<std::streamsize>(lm.parameters().size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write to model file: " + path);
}

NgramLM load_ngram_lm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not an n-gram model file: " + path);
  }
  uint32_t order = 0, alphabet_len = 0;
  read_raw(in, order);
  read_raw(in, alphabet_len);
  std::string alphabet(alphabet_len, '\0');
  in.read(alphabet.data(), alphabet_len);
  double smoothing = 0.0;
  read_raw(in, smoothing);
  uint64_t count = 0;
  read_raw(in, count);
  NgramLM lm(static_cast<int>(order), std::move(alphabet), smoothing);
  if (count != lm.parameters().size()) {
    throw std::runtime_error("model file parameter count mismatch: " + path);
  }
  in.read(reinterpret_cast<char*>(lm.mutable_parameters().data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated model file: " + path);
  return lm;
}

}  // namespace attrib
