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

#ifndef ATTRIB_FEATURIZE_HPP_
#define ATTRIB_FEATURIZE_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace attrib {

// Text featurization shared by the baseline detectors and the scorer's
// negative mining: length counts, bag-of-words / TF-IDF over word n-grams,
// per-feature standardization, and embedding providers.
//
// Tokenization contract (fixed so vectors are bit-reproducible): text is
// lowercased bytewise over ASCII letters; a token is a maximal run of ASCII
// alphanumeric bytes; everything else, including multi-byte UTF-8 sequences,
// separates tokens. Word n-grams are tokens joined by a single space.

enum class LengthUnit { kWord, kChar };

// kWord: number of maximal runs of non-whitespace bytes.
// kChar: number of Unicode scalar values (UTF-8 continuation bytes excluded).
double length_feature(std::string_view text, LengthUnit unit);

std::vector<std::string> tokenize(std::string_view text);

// Sparse vector with strictly increasing indices and no explicit zeros.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(uint32_t dimension) : dimension_(dimension) {}

  // entries must be sorted by index, strictly increasing, all < dimension.
  // Zero values are dropped.
  static SparseVector from_sorted(uint32_t dimension,
                                  std::vector<std::pair<uint32_t, double>> entries);

  uint32_t dimension() const { return dimension_; }
  const std::vector<std::pair<uint32_t, double>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  double squared_norm() const;
  SparseVector scaled(double factor) const;
  // L2 normalization; a zero vector is returned unchanged.
  SparseVector l2_normalized() const;

 private:
  uint32_t dimension_ = 0;
  std::vector<std::pair<uint32_t, double>> entries_;
};

double dot(const SparseVector& u, const SparseVector& v);

// dot(u,v) / (|u||v|), zero if either norm is zero; clamped to [-1, 1].
double cosine(const SparseVector& u, const SparseVector& v);
double cosine(std::span<const double> u, std::span<const double> v);

struct Vocabulary {
  std::map<std::string, uint32_t> index;          // term -> dense column
  std::unordered_map<std::string, uint32_t> df;   // term -> document frequency
  int ngram_lo = 1;
  int ngram_hi = 2;
  uint32_t min_df = 2;
  uint32_t document_count = 0;

  uint32_t size() const { return static_cast<uint32_t>(index.size()); }
};

// Counts term document frequencies over `texts`, drops terms with
// df < min_df, and assigns dense column indices in lexicographic term order.
Vocabulary fit_vocab(const std::vector<std::string>& texts, int ngram_lo = 1,
                     int ngram_hi = 2, uint32_t min_df = 2);

// Raw in-vocabulary n-gram counts; out-of-vocabulary terms contribute nothing.
SparseVector bow_vector(std::string_view text, const Vocabulary& vocab);

// Smoothed idf: idf_t = ln((1 + N) / (1 + df_t)) + 1.
std::vector<double> fit_idf(const Vocabulary& vocab);

// counts * idf per term, then L2-normalized (zero vectors stay zero).
SparseVector tfidf(const SparseVector& counts, std::span<const double> idf);

// term,index,df rows for inspection; terms contain only [0-9a-z ] so no
// escaping is needed.
void write_vocab_csv(const Vocabulary& vocab, const std::string& path);

class Standardizer {
 public:
  Standardizer() = default;

  // Column-wise mean and population standard deviation over the rows.
  // Stored std is floored at kEpsilon.
  static Standardizer fit(const std::vector<std::vector<double>>& rows);

  // Restores a fitted standardizer from persisted statistics.
  static Standardizer from_moments(std::vector<double> mean, std::vector<double> stddev);

  std::vector<double> transform(std::span<const double> row) const;
  void transform_inplace(std::vector<double>& row) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }

  static constexpr double kEpsilon = 1e-12;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

// Embedding provider for negative mining. The internal provider stands in
// for a sentence encoder at desk scale: an L2-normalized TF-IDF vector over
// a dedicated vocabulary fitted on a reference corpus. The external provider
// reads precomputed embeddings keyed by content hash, preserving fidelity
// when real encoder outputs are available.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual size_t dimension() const = 0;
  virtual std::vector<double> embed(const std::string& text) const = 0;
};

class InternalEmbedder : public Embedder {
 public:
  explicit InternalEmbedder(const std::vector<std::string>& reference_texts,
                            int ngram_lo = 1, int ngram_hi = 2, uint32_t min_df = 2);

  size_t dimension() const override { return vocab_.size(); }
  std::vector<double> embed(const std::string& text) const override;

  const Vocabulary& vocab() const { return vocab_; }

 private:
  Vocabulary vocab_;
  std::vector<double> idf_;
};

// Embedding file: JSON Lines, one object per line with fields
//   hash:   hex SHA-256 of the UTF-8 text
//   vector: array of reals (constant dimension across the file)
class ExternalEmbedder : public Embedder {
 public:
  explicit ExternalEmbedder(const std::string& path);

  size_t dimension() const override { return dimension_; }
  // Throws std::runtime_error naming the text hash on a lookup miss.
  std::vector<double> embed(const std::string& text) const override;

 private:
  size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> by_hash_;
};

// Hex-encoded SHA-256 of the UTF-8 bytes.
std::string sha256_hex(std::string_view data);

}  // namespace attrib

#endif  // ATTRIB_FEATURIZE_HPP_
