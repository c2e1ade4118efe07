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

#include "attrib/featurize.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace attrib {

namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

}  // namespace

double length_feature(std::string_view text, LengthUnit unit) {
  if (unit == LengthUnit::kWord) {
    size_t words = 0;
    bool in_word = false;
    for (const char c : text) {
      const bool space = is_ascii_space(static_cast<unsigned char>(c));
      if (!space && !in_word) ++words;
      in_word = !space;
    }
    return static_cast<double>(words);
  }
  // Unicode scalar count: every byte except UTF-8 continuations (10xxxxxx).
  size_t chars = 0;
  for (const char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++chars;
  }
  return static_cast<double>(chars);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (is_ascii_alnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

SparseVector SparseVector::from_sorted(uint32_t dimension,
                                       std::vector<std::pair<uint32_t, double>> entries) {
  SparseVector v(dimension);
  v.entries_.reserve(entries.size());
  uint32_t prev = 0;
  bool first = true;
  for (auto& [idx, value] : entries) {
    if (!first && idx <= prev) throw std::invalid_argument("sparse indices must strictly increase");
    if (idx >= dimension) throw std::invalid_argument("sparse index out of range");
    prev = idx;
    first = false;
    if (value != 0.0) v.entries_.emplace_back(idx, value);
  }
  return v;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& [idx, value] : entries_) s += value * value;
  return s;
}

SparseVector SparseVector::scaled(double factor) const {
  SparseVector out(dimension_);
  out.entries_.reserve(entries_.size());
  for (const auto& [idx, value] : entries_) {
    const double v = value * factor;
    if (v != 0.0) out.entries_.emplace_back(idx, v);
  }
  return out;
}

SparseVector SparseVector::l2_normalized() const {
  const double norm = std::sqrt(squared_norm());
  if (norm == 0.0) return *this;
  return scaled(1.0 / norm);
}

double dot(const SparseVector& u, const SparseVector& v) {
  double s = 0.0;
  auto it_u = u.entries().begin();
  auto it_v = v.entries().begin();
  while (it_u != u.entries().end() && it_v != v.entries().end()) {
    if (it_u->first < it_v->first) {
      ++it_u;
    } else if (it_v->first < it_u->first) {
      ++it_v;
    } else {
      s += it_u->second * it_v->second;
      ++it_u;
      ++it_v;
    }
  }
  return s;
}

double cosine(const SparseVector& u, const SparseVector& v) {
  const double nu = u.squared_norm();
  const double nv = v.squared_norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot(u, v) / std::sqrt(nu * nv), -1.0, 1.0);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double d = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    d += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(d / std::sqrt(nu * nv), -1.0, 1.0);
}

namespace {

// Applies fn to every n-gram (space-joined token run) of the text.
template <typename Fn>
void for_each_ngram(const std::vector<std::string>& tokens, int lo, int hi, Fn&& fn) {
  for (int n = lo; n <= hi; ++n) {
    if (n < 1 || tokens.size() < static_cast<size_t>(n)) continue;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string term = tokens[i];
      for (size_t k = 1; k < static_cast<size_t>(n); ++k) {
        term.push_back(' ');
        term += tokens[i + k];
      }
      fn(term);
    }
  }
}

}  // namespace

Vocabulary fit_vocab(const std::vector<std::string>& texts, int ngram_lo, int ngram_hi,
                     uint32_t min_df) {
  if (texts.empty()) throw std::invalid_argument("fit_vocab: empty text list");
  if (ngram_lo < 1 || ngram_hi < ngram_lo) throw std::invalid_argument("fit_vocab: bad ngram range");
  Vocabulary vocab;
  vocab.ngram_lo = ngram_lo;
  vocab.ngram_hi = ngram_hi;
  vocab.min_df = min_df;
  vocab.document_count = static_cast<uint32_t>(texts.size());

  std::unordered_map<std::string, uint32_t> df;
  std::set<std::string> seen;
  for (const auto& text : texts) {
    seen.clear();
    const auto tokens = tokenize(text);
    for_each_ngram(tokens, ngram_lo, ngram_hi, [&](const std::string& term) {
      if (seen.insert(term).second) ++df[term];
    });
  }

  // std::map iteration gives lexicographic column order.
  for (auto& [term, count] : df) {
    if (count >= min_df) vocab.index.emplace(term, 0);
  }
  uint32_t next = 0;
  for (auto& [term, col] : vocab.index) {
    col = next++;
    vocab.df.emplace(term, df.at(term));
  }
  return vocab;
}

SparseVector bow_vector(std::string_view text, const Vocabulary& vocab) {
  std::map<uint32_t, double> counts;
  const auto tokens = tokenize(text);
  for_each_ngram(tokens, vocab.ngram_lo, vocab.ngram_hi, [&](const std::string& term) {
    const auto it = vocab.index.find(term);
    if (it != vocab.index.end()) counts[it->second] += 1.0;
  });
  std::vector<std::pair<uint32_t, double>> entries(counts.begin(), counts.end());
  return SparseVector::from_sorted(vocab.size(), std::move(entries));
}

std::vector<double> fit_idf(const Vocabulary& vocab) {
  std::vector<double> idf(vocab.size(), 0.0);
  const double n = 1.0 + static_cast<double>(vocab.document_count);
  for (const auto& [term, col] : vocab.index) {
    const double df = static_cast<double>(vocab.df.at(term));
    idf[col] = std::log(n / (1.0 + df)) + 1.0;
  }
  return idf;
}

SparseVector tfidf(const SparseVector& counts, std::span<const double> idf) {
  std::vector<std::pair<uint32_t, double>> entries;
  entries.reserve(counts.entries().size());
  for (const auto& [idx, value] : counts.entries()) {
    entries.emplace_back(idx, value * idf[idx]);
  }
  return SparseVector::from_sorted(counts.dimension(), std::move(entries)).l2_normalized();
}

void write_vocab_csv(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary csv: " + path);
  out << "term,index,df\n";
  for (const auto& [term, col] : vocab.index) {
    out << term << ',' << col << ',' << vocab.df.at(term) << '\n';
  }
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("Standardizer::fit: no rows");
  const size_t dim = rows.front().size();
  Standardizer s;
  s.mean_.assign(dim, 0.0);
  s.stddev_.assign(dim, 0.0);
  for (const auto& row : rows) {
    if (row.size() != dim) throw std::invalid_argument("Standardizer::fit: ragged rows");
    for (size_t i = 0; i < dim; ++i) s.mean_[i] += row[i];
  }
  for (auto& m : s.mean_) m /= static_cast<double>(rows.size());
  for (const auto& row : rows) {
    for (size_t i = 0; i < dim; ++i) {
      const double d = row[i] - s.mean_[i];
      s.stddev_[i] += d * d;
    }
  }
  for (auto& v : s.stddev_) v = std::max(std::sqrt(v / static_cast<double>(rows.size())), kEpsilon);
  return s;
}

Standardizer Standardizer::from_moments(std::vector<double> mean, std::vector<double> stddev) {
  if (mean.size() != stddev.size()) {
    throw std::invalid_argument("Standardizer::from_moments: dimension mismatch");
  }
  Standardizer s;
  s.mean_ = std::move(mean);
  s.stddev_ = std::move(stddev);
  for (auto& v : s.stddev_) v = std::max(v, kEpsilon);
  return s;
}

std::vector<double> Standardizer::transform(std::span<const double> row) const {
  std::vector<double> out(row.begin(), row.end());
  transform_inplace(out);
  return out;
}

void Standardizer::transform_inplace(std::vector<double>& row) const {
  if (row.size() != mean_.size()) throw std::invalid_argument("Standardizer: dimension mismatch");
  for (size_t i = 0; i < row.size(); ++i) row[i] = (row[i] - mean_[i]) / stddev_[i];
}

InternalEmbedder::InternalEmbedder(const std::vector<std::string>& reference_texts,
                                   int ngram_lo, int ngram_hi, uint32_t min_df)
    : vocab_(fit_vocab(reference_texts, ngram_lo, ngram_hi, min_df)), idf_(fit_idf(vocab_)) {}

std::vector<double> InternalEmbedder::embed(const std::string& text) const {
  const SparseVector v = tfidf(bow_vector(text, vocab_), idf_);
  std::vector<double> dense(vocab_.size(), 0.0);
  for (const auto& [idx, value] : v.entries()) dense[idx] = value;
  return dense;
}

ExternalEmbedder::ExternalEmbedder(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("hash") || !j.contains("vector")) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected fields hash, vector");
    }
    std::vector<double> vec = j.at("vector").get<std::vector<double>>();
    if (dimension_ == 0) {
      dimension_ = vec.size();
    } else if (vec.size() != dimension_) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": inconsistent embedding dimension");
    }
    by_hash_[j.at("hash").get<std::string>()] = std::move(vec);
  }
}

std::vector<double> ExternalEmbedder::embed(const std::string& text) const {
  const std::string key = sha256_hex(text);
  const auto it = by_hash_.find(key);
  if (it == by_hash_.end()) {
    throw std::runtime_error("no precomputed embedding for text hash " + key);
  }
  return it->second;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace attrib
