// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_RERANKER_HPP
#define VULNLINK_RERANKER_HPP

#include "vulnlink/common.hpp"
#include "vulnlink/corpus.hpp"
#include "vulnlink/eval.hpp"
#include "vulnlink/screener.hpp"
#include "vulnlink/textproc.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace vulnlink {

// Sparse fixed-dimension feature vector for one (vulnerability, library)
// pair. Slot indices are unique and ascending; every value is finite.
struct PairEncoding {
  uint32_t dim = 0;
  std::vector<std::pair<uint32_t, double>> slots;

  std::vector<double> to_dense() const;
};

// Deterministic lexical encoder. Layout within the feature vector:
//   [0]                      constant 1.0 segment marker
//   [1, 1+h)                 hashed query tokens
//   [1+h, 1+2h)              hashed document tokens
//   [dim-3, dim)             interaction features:
//                              shared-token count (over token sets),
//                              shared-entity count / |query token set|,
//                              screener score
// where h = (dim - 4) / 2. Hashed segments are L2-normalized separately.
// Both token sequences are capped at max_tokens_per_side before anything
// else happens.
class PairEncoder {
public:
  PairEncoder(uint32_t feature_dim, uint64_t hash_seed,
              size_t max_tokens_per_side, const EntityVocabulary &vocab);

  PairEncoding encode(const std::vector<std::string> &vuln_tokens,
                      const LibraryDocument &doc,
                      double screener_score) const;

  uint32_t feature_dim() const { return dim_; }
  uint64_t hash_seed() const { return hash_seed_; }
  size_t max_tokens_per_side() const { return max_tokens_; }
  // Segment bounds, half-open, for structural assertions.
  uint32_t query_segment_begin() const { return 1; }
  uint32_t query_segment_end() const { return 1 + half_; }
  uint32_t doc_segment_begin() const { return 1 + half_; }
  uint32_t doc_segment_end() const { return 1 + 2 * half_; }

private:
  uint32_t dim_;
  uint32_t half_;
  uint64_t hash_seed_;
  size_t max_tokens_;
  const EntityVocabulary &vocab_;
};

struct ModelParameters {
  uint32_t feature_dim = 2048;
  uint32_t hidden_dim = 256;
  uint64_t hash_seed = 0;
  uint32_t max_tokens_per_side = 512;
  std::vector<double> w1; // hidden_dim rows x feature_dim cols, row-major
  std::vector<double> b1; // hidden_dim
  std::vector<double> w2; // hidden_dim
  double b2 = 0;

  // Shape consistency and finiteness of every parameter.
  void validate() const;
};

// Uniform init in +/- 1/sqrt(fan_in); biases zero. Consumes the rng
// stream in a fixed order, so equal seeds give equal parameters.
ModelParameters init_parameters(uint32_t feature_dim, uint32_t hidden_dim,
                                Rng &rng);

// Forward pass artifacts kept for the backward pass.
struct ForwardCache {
  std::vector<double> hidden; // post-relu activations
  double s_hat = 0;           // pre-activation output
  double s = 0;               // 1 / (1 + exp(s_hat)), clamped
  bool clamped = false;       // gradient through the clamp is zero
};

ForwardCache forward_pair(const PairEncoding &enc,
                          const ModelParameters &params);

// Coherence score s = 1 / (1 + exp(s_hat)), clamped into
// [1e-12, 1 - 1e-12]. Non-finite intermediates raise NumericError.
double score_pair(const PairEncoding &enc, const ModelParameters &params);

// Loss = -(1/T) sum( alpha*y*ln(s) + (1-alpha)*(1-y)*ln(1-s) ).
double weighted_bce_loss(const std::vector<double> &scores,
                         const std::vector<int> &labels, double alpha);

struct TrainingBatch {
  std::vector<PairEncoding> pairs;
  std::vector<int> labels; // binary, parallel to pairs
  double alpha = 0.9;
};

struct Gradients {
  std::vector<double> w1, b1, w2;
  double b2 = 0;
};

// Mean loss over the batch; gradients of that mean with respect to every
// parameter. Accumulation follows pair order, so results are independent
// of how callers group work.
double batch_loss_and_gradient(const TrainingBatch &batch,
                               const ModelParameters &params,
                               Gradients &grads);

// Adam moment estimates; decoupled weight decay is applied to weights
// only, never biases.
struct AdamState {
  std::vector<double> m_w1, v_w1, m_b1, v_b1, m_w2, v_w2;
  double m_b2 = 0, v_b2 = 0;
  uint64_t step = 0;

  explicit AdamState(const ModelParameters &params);
};

void adam_update(ModelParameters &params, const Gradients &grads,
                 AdamState &state, double lr, double weight_decay);

struct TrainingConfig {
  double alpha = 0.9;
  size_t batch_size = 32;
  double lr = 1e-3;
  size_t epochs = 20;
  uint64_t seed = 0;
  uint32_t feature_dim = 2048;
  size_t max_tokens_per_side = 512;
  uint32_t hidden_dim = 256;
  double weight_decay = 0.01;

  void validate() const;
};

struct EpochStats {
  size_t epoch = 0;       // 0 is the untrained baseline
  double train_loss = 0;  // mean pair loss across the epoch
  double val_f1_at_1 = 0; // macro F1@1 on the validation split
};

struct TrainingLog {
  std::vector<EpochStats> epochs;
  size_t best_epoch = 0;
  size_t pair_count = 0;
  size_t positive_count = 0;
};

// Builds (candidate, label) pairs from the screener's top candidates for
// every training vulnerability: affected candidates are positives, the
// rest negatives. Mini-batch descent on the weighted BCE loss; the
// returned parameters are the ones with the best validation F1@1 seen
// (the untrained baseline included). Deterministic under config.seed.
ModelParameters train(const DatasetSplit &splits, const Screener &screener,
                      const std::vector<LibraryDocument> &docs,
                      const TrainingConfig &config,
                      TrainingLog *log = nullptr);

// Descending score, ties broken by coordinate, truncated to k.
std::vector<ScoredLibrary> order_by_score(std::vector<ScoredLibrary> scored,
                                          size_t k);

// Stage two at query time: scores a candidate set with a trained model.
class Reranker {
public:
  Reranker(const ModelParameters &params, const EntityVocabulary &vocab,
           const std::vector<LibraryDocument> &docs,
           const StopwordSet &stopwords);
  Reranker(const ModelParameters &params, const EntityVocabulary &vocab,
           const std::vector<LibraryDocument> &docs);

  // Empty candidate sets yield empty results.
  std::vector<ScoredLibrary> rank(const std::string &description,
                                  const CandidateSet &candidates,
                                  size_t k) const;
  double score_one(const std::string &description,
                   const std::string &library, double screener_score) const;

  const ModelParameters &params() const { return params_; }

private:
  std::vector<std::string> query_tokens(const std::string &description) const;
  const LibraryDocument &doc_for(const std::string &library) const;

  ModelParameters params_;
  PairEncoder encoder_;
  std::unordered_map<std::string, const LibraryDocument *> doc_by_name_;
  const StopwordSet &stopwords_;
};

// Versioned JSON model file; reload reproduces scores bit-exactly.
std::string model_to_json(const ModelParameters &params);
ModelParameters model_from_json(const std::string &text);
void save_model(const ModelParameters &params, const std::string &path);
ModelParameters load_model(const std::string &path);

} // namespace vulnlink

#endif // VULNLINK_RERANKER_HPP
