// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/reranker.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vulnlink {

namespace {

constexpr double kScoreEpsilon = 1e-12;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Segment salts keep query and document hash streams independent.
constexpr uint64_t kQuerySalt = 0x71c9a1d0f5a3b217ULL;
constexpr uint64_t kDocSalt = 0xd3e2944a8f0c65b9ULL;

void check_finite(double v, const char *what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite value in ") + what);
  }
}

} // namespace

std::vector<double> PairEncoding::to_dense() const {
  std::vector<double> dense(dim, 0.0);
  for (const auto &slot : slots) dense[slot.first] = slot.second;
  return dense;
}

PairEncoder::PairEncoder(uint32_t feature_dim, uint64_t hash_seed,
                         size_t max_tokens_per_side,
                         const EntityVocabulary &vocab)
    : dim_(feature_dim), half_((feature_dim - 4) / 2), hash_seed_(hash_seed),
      max_tokens_(max_tokens_per_side), vocab_(vocab) {
  if (feature_dim < 8)
    throw ValidationError("feature_dim must be at least 8");
  if (max_tokens_per_side == 0)
    throw ValidationError("max_tokens_per_side must be positive");
}

PairEncoding PairEncoder::encode(const std::vector<std::string> &vuln_tokens,
                                 const LibraryDocument &doc,
                                 double screener_score) const {
  check_finite(screener_score, "screener score");

  const size_t q_take = std::min(vuln_tokens.size(), max_tokens_);
  const size_t d_take = std::min(doc.tokens.size(), max_tokens_);

  // Hashed occurrence counts per segment, then each segment L2-normalized.
  std::map<uint32_t, double> values;
  values[0] = 1.0;
  for (size_t i = 0; i < q_take; ++i) {
    const uint32_t slot =
        query_segment_begin() +
        static_cast<uint32_t>(fnv1a64(vuln_tokens[i], hash_seed_ ^ kQuerySalt) %
                              half_);
    values[slot] += 1.0;
  }
  for (size_t i = 0; i < d_take; ++i) {
    const uint32_t slot =
        doc_segment_begin() +
        static_cast<uint32_t>(fnv1a64(doc.tokens[i], hash_seed_ ^ kDocSalt) %
                              half_);
    values[slot] += 1.0;
  }
  auto normalize_segment = [&values](uint32_t begin, uint32_t end) {
    double sq = 0;
    for (auto it = values.lower_bound(begin);
         it != values.end() && it->first < end; ++it) {
      sq += it->second * it->second;
    }
    if (sq <= 0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (auto it = values.lower_bound(begin);
         it != values.end() && it->first < end; ++it) {
      it->second *= inv;
    }
  };
  normalize_segment(query_segment_begin(), query_segment_end());
  normalize_segment(doc_segment_begin(), doc_segment_end());

  std::set<std::string> q_set(vuln_tokens.begin(), vuln_tokens.begin() + q_take);
  std::set<std::string> d_set(doc.tokens.begin(), doc.tokens.begin() + d_take);
  size_t shared = 0;
  size_t shared_entities = 0;
  for (const auto &tok : q_set) {
    if (d_set.count(tok)) {
      ++shared;
      if (vocab_.contains(tok)) ++shared_entities;
    }
  }
  values[dim_ - 3] = static_cast<double>(shared);
  values[dim_ - 2] = static_cast<double>(shared_entities) /
                     static_cast<double>(std::max<size_t>(1, q_set.size()));
  values[dim_ - 1] = screener_score;

  PairEncoding enc;
  enc.dim = dim_;
  enc.slots.reserve(values.size());
  for (const auto &entry : values) {
    check_finite(entry.second, "pair encoding");
    if (entry.second != 0.0) enc.slots.emplace_back(entry.first, entry.second);
  }
  return enc;
}

void ModelParameters::validate() const {
  if (feature_dim < 8) throw ValidationError("model feature_dim too small");
  if (hidden_dim == 0) throw ValidationError("model hidden_dim is zero");
  const size_t expect_w1 =
      static_cast<size_t>(feature_dim) * static_cast<size_t>(hidden_dim);
  if (w1.size() != expect_w1 || b1.size() != hidden_dim ||
      w2.size() != hidden_dim)
    throw ValidationError("model parameter shapes are inconsistent");
  for (double v : w1) check_finite(v, "w1");
  for (double v : b1) check_finite(v, "b1");
  for (double v : w2) check_finite(v, "w2");
  check_finite(b2, "b2");
}

ModelParameters init_parameters(uint32_t feature_dim, uint32_t hidden_dim,
                                Rng &rng) {
  ModelParameters p;
  p.feature_dim = feature_dim;
  p.hidden_dim = hidden_dim;
  p.w1.resize(static_cast<size_t>(feature_dim) * hidden_dim);
  p.b1.assign(hidden_dim, 0.0);
  p.w2.resize(hidden_dim);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  for (auto &w : p.w1) w = rng.next_symmetric(r1);
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (auto &w : p.w2) w = rng.next_symmetric(r2);
  p.b2 = 0.0;
  return p;
}

ForwardCache forward_pair(const PairEncoding &enc,
                          const ModelParameters &params) {
  if (enc.dim != params.feature_dim)
    throw ValidationError("encoding dimension does not match model");
  ForwardCache cache;
  cache.hidden.resize(params.hidden_dim);
  const size_t dim = params.feature_dim;
  for (uint32_t r = 0; r < params.hidden_dim; ++r) {
    double acc = params.b1[r];
    const double *row = params.w1.data() + static_cast<size_t>(r) * dim;
    for (const auto &slot : enc.slots) {
      acc += row[slot.first] * slot.second;
    }
    cache.hidden[r] = acc > 0.0 ? acc : 0.0;
  }
  double s_hat = params.b2;
  for (uint32_t r = 0; r < params.hidden_dim; ++r) {
    s_hat += params.w2[r] * cache.hidden[r];
  }
  check_finite(s_hat, "pre-activation output");
  cache.s_hat = s_hat;
  // Verbatim form: s = 1 / (1 + exp(s_hat)). Large positive s_hat
  // overflows exp to +inf and the quotient underflows to 0; the clamp
  // turns both tails into the epsilon bounds.
  double s = 1.0 / (1.0 + std::exp(s_hat));
  cache.clamped = false;
  if (s < kScoreEpsilon) {
    s = kScoreEpsilon;
    cache.clamped = true;
  } else if (s > 1.0 - kScoreEpsilon) {
    s = 1.0 - kScoreEpsilon;
    cache.clamped = true;
  }
  cache.s = s;
  return cache;
}

double score_pair(const PairEncoding &enc, const ModelParameters &params) {
  return forward_pair(enc, params).s;
}

double weighted_bce_loss(const std::vector<double> &scores,
                         const std::vector<int> &labels, double alpha) {
  if (scores.size() != labels.size())
    throw ValidationError("scores and labels differ in length");
  if (scores.empty()) throw ValidationError("loss over an empty batch");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("alpha must lie in (0,1)");
  double sum = 0;
  for (size_t t = 0; t < scores.size(); ++t) {
    const double s = scores[t];
    if (!(s > 0.0 && s < 1.0))
      throw ValidationError("score outside (0,1) in loss");
    if (labels[t] != 0 && labels[t] != 1)
      throw ValidationError("labels must be binary");
    const double y = labels[t];
    sum += alpha * y * std::log(s) + (1.0 - alpha) * (1.0 - y) * std::log(1.0 - s);
  }
  return -sum / static_cast<double>(scores.size());
}

double batch_loss_and_gradient(const TrainingBatch &batch,
                               const ModelParameters &params,
                               Gradients &grads) {
  if (batch.pairs.size() != batch.labels.size())
    throw ValidationError("batch pairs and labels differ in length");
  if (batch.pairs.empty()) throw ValidationError("empty training batch");
  if (!(batch.alpha > 0.0 && batch.alpha < 1.0))
    throw ValidationError("alpha must lie in (0,1)");

  const size_t dim = params.feature_dim;
  grads.w1.assign(params.w1.size(), 0.0);
  grads.b1.assign(params.b1.size(), 0.0);
  grads.w2.assign(params.w2.size(), 0.0);
  grads.b2 = 0.0;

  const double inv_t = 1.0 / static_cast<double>(batch.pairs.size());
  double loss = 0;
  for (size_t t = 0; t < batch.pairs.size(); ++t) {
    const PairEncoding &enc = batch.pairs[t];
    const int label = batch.labels[t];
    if (label != 0 && label != 1)
      throw ValidationError("labels must be binary");
    const ForwardCache f = forward_pair(enc, params);
    const double y = label;
    loss -= inv_t * (batch.alpha * y * std::log(f.s) +
                     (1.0 - batch.alpha) * (1.0 - y) * std::log(1.0 - f.s));

    // d loss_t / d s_hat, with s = 1/(1+exp(s_hat)) so ds/ds_hat = -s(1-s).
    // The clamp zeroes the gradient at the tails.
    double g_shat = 0.0;
    if (!f.clamped) {
      g_shat = inv_t * (batch.alpha * y * (1.0 - f.s) -
                        (1.0 - batch.alpha) * (1.0 - y) * f.s);
    }
    if (g_shat == 0.0) continue;

    grads.b2 += g_shat;
    for (uint32_t r = 0; r < params.hidden_dim; ++r) {
      const double h = f.hidden[r];
      if (h > 0.0) {
        grads.w2[r] += g_shat * h;
        const double g_pre = g_shat * params.w2[r];
        if (g_pre != 0.0) {
          double *grow = grads.w1.data() + static_cast<size_t>(r) * dim;
          for (const auto &slot : enc.slots) {
            grow[slot.first] += g_pre * slot.second;
          }
          grads.b1[r] += g_pre;
        }
      }
    }
  }
  return loss;
}

AdamState::AdamState(const ModelParameters &params)
    : m_w1(params.w1.size(), 0.0), v_w1(params.w1.size(), 0.0),
      m_b1(params.b1.size(), 0.0), v_b1(params.b1.size(), 0.0),
      m_w2(params.w2.size(), 0.0), v_w2(params.w2.size(), 0.0) {}

namespace {

void adam_apply(double *theta, const double *g, double *m, double *v,
                size_t n, double lr, double bc1, double bc2, double decay) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    theta[i] -= lr * (m_hat / (std::sqrt(v_hat) + kAdamEps) + decay * theta[i]);
  }
}

} // namespace

void adam_update(ModelParameters &params, const Gradients &grads,
                 AdamState &state, double lr, double weight_decay) {
  if (grads.w1.size() != params.w1.size() ||
      grads.b1.size() != params.b1.size() ||
      grads.w2.size() != params.w2.size())
    throw ValidationError("gradient shapes do not match parameters");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  adam_apply(params.w1.data(), grads.w1.data(), state.m_w1.data(),
             state.v_w1.data(), params.w1.size(), lr, bc1, bc2, weight_decay);
  adam_apply(params.b1.data(), grads.b1.data(), state.m_b1.data(),
             state.v_b1.data(), params.b1.size(), lr, bc1, bc2, 0.0);
  adam_apply(params.w2.data(), grads.w2.data(), state.m_w2.data(),
             state.v_w2.data(), params.w2.size(), lr, bc1, bc2, weight_decay);
  adam_apply(&params.b2, &grads.b2, &state.m_b2, &state.v_b2, 1, lr, bc1, bc2,
             0.0);
}

void TrainingConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must lie in (0,1)");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (feature_dim < 8) throw ConfigError("feature_dim must be at least 8");
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
  if (max_tokens_per_side == 0)
    throw ConfigError("max_tokens_per_side must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

std::vector<ScoredLibrary> order_by_score(std::vector<ScoredLibrary> scored,
                                          size_t k) {
  std::sort(scored.begin(), scored.end(),
            [](const ScoredLibrary &a, const ScoredLibrary &b) {
              if (a.score != b.score) return a.score > b.score;
              return a.library < b.library;
            });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

namespace {

// Candidate pairs for one vulnerability, encodings precomputed once and
// reused every epoch.
struct VulnPairBlock {
  std::string vuln_id;
  std::set<std::string> affected;
  std::vector<std::string> cand_names;
  std::vector<PairEncoding> encodings;
  std::vector<int> labels;
};

std::vector<VulnPairBlock>
build_pair_blocks(const std::vector<VulnerabilityRecord> &vulns,
                  const Screener &screener, const PairEncoder &encoder,
                  const std::unordered_map<std::string, const LibraryDocument *>
                      &doc_by_name,
                  const StopwordSet &stopwords) {
  std::vector<VulnPairBlock> blocks;
  for (const auto &vuln : vulns) {
    if (!vuln.labeled()) continue;
    const CandidateSet cands = screener.screen(vuln.description);
    if (cands.empty()) continue;
    VulnPairBlock block;
    block.vuln_id = vuln.id;
    block.affected = vuln.labels;
    const std::vector<std::string> q_tokens =
        clean_text(vuln.description, stopwords);
    block.cand_names.reserve(cands.size());
    block.encodings.reserve(cands.size());
    block.labels.reserve(cands.size());
    for (const auto &cand : cands.candidates) {
      auto it = doc_by_name.find(cand.library);
      if (it == doc_by_name.end())
        throw ValidationError("candidate without document: " + cand.library);
      block.cand_names.push_back(cand.library);
      block.encodings.push_back(
          encoder.encode(q_tokens, *it->second, cand.score));
      block.labels.push_back(block.affected.count(cand.library) ? 1 : 0);
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

double validation_f1_at_1(const std::vector<VulnPairBlock> &blocks,
                          const ModelParameters &params) {
  std::vector<PredictionRecord> preds;
  for (const auto &block : blocks) {
    PredictionRecord pred;
    pred.vuln_id = block.vuln_id;
    pred.affected = block.affected;
    std::vector<ScoredLibrary> scored;
    scored.reserve(block.encodings.size());
    for (size_t i = 0; i < block.encodings.size(); ++i) {
      scored.push_back(ScoredLibrary{block.cand_names[i],
                                     score_pair(block.encodings[i], params)});
    }
    const size_t n = scored.size();
    pred.ranked = order_by_score(std::move(scored), n);
    preds.push_back(std::move(pred));
  }
  if (preds.empty()) return 0.0;
  return macro_report(preds, {1}).per_k[0].f1;
}

double mean_pair_loss(const std::vector<PairEncoding> &pairs,
                      const std::vector<int> &labels,
                      const ModelParameters &params, double alpha) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto &enc : pairs) scores.push_back(score_pair(enc, params));
  return weighted_bce_loss(scores, labels, alpha);
}

} // namespace

ModelParameters train(const DatasetSplit &splits, const Screener &screener,
                      const std::vector<LibraryDocument> &docs,
                      const TrainingConfig &config, TrainingLog *log) {
  config.validate();

  std::unordered_map<std::string, const LibraryDocument *> doc_by_name;
  doc_by_name.reserve(docs.size());
  for (const auto &doc : docs) doc_by_name.emplace(doc.library, &doc);

  // Entity flags come from the same vocabulary the screener recognizes
  // with, and cleaning uses the same stopword list.
  PairEncoder encoder(config.feature_dim, config.seed,
                      config.max_tokens_per_side, screener.vocab());
  const StopwordSet &stopwords = screener.stopwords();
  const std::vector<VulnPairBlock> train_blocks = build_pair_blocks(
      splits.training, screener, encoder, doc_by_name, stopwords);
  const std::vector<VulnPairBlock> val_blocks = build_pair_blocks(
      splits.validation, screener, encoder, doc_by_name, stopwords);

  std::vector<PairEncoding> pairs;
  std::vector<int> labels;
  for (const auto &block : train_blocks) {
    pairs.insert(pairs.end(), block.encodings.begin(), block.encodings.end());
    labels.insert(labels.end(), block.labels.begin(), block.labels.end());
  }
  if (pairs.empty())
    throw ConfigError("training set is empty after screening");

  Rng rng(config.seed);
  ModelParameters params =
      init_parameters(config.feature_dim, config.hidden_dim, rng);
  params.hash_seed = config.seed;
  params.max_tokens_per_side =
      static_cast<uint32_t>(config.max_tokens_per_side);

  TrainingLog local_log;
  TrainingLog &tlog = log != nullptr ? *log : local_log;
  tlog.epochs.clear();
  tlog.pair_count = pairs.size();
  tlog.positive_count = 0;
  for (int y : labels) tlog.positive_count += static_cast<size_t>(y);

  const bool have_validation = !val_blocks.empty();
  ModelParameters best = params;
  double best_f1 = validation_f1_at_1(val_blocks, params);
  double best_loss = mean_pair_loss(pairs, labels, params, config.alpha);
  size_t best_epoch = 0;
  tlog.epochs.push_back(EpochStats{0, best_loss, best_f1});

  AdamState adam(params);
  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  Gradients grads;
  for (size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      TrainingBatch batch;
      batch.alpha = config.alpha;
      batch.pairs.reserve(end - start);
      batch.labels.reserve(end - start);
      for (size_t i = start; i < end; ++i) {
        batch.pairs.push_back(pairs[order[i]]);
        batch.labels.push_back(labels[order[i]]);
      }
      const double batch_loss = batch_loss_and_gradient(batch, params, grads);
      loss_sum += batch_loss * static_cast<double>(end - start);
      adam_update(params, grads, adam, config.lr, config.weight_decay);
    }
    const double epoch_loss = loss_sum / static_cast<double>(order.size());
    const double val_f1 = validation_f1_at_1(val_blocks, params);
    tlog.epochs.push_back(EpochStats{epoch, epoch_loss, val_f1});

    // Strict improvement keeps the earliest best, so reruns agree.
    if (have_validation ? (val_f1 > best_f1) : (epoch_loss < best_loss)) {
      best = params;
      best_f1 = val_f1;
      best_loss = epoch_loss;
      best_epoch = epoch;
    }
  }
  tlog.best_epoch = best_epoch;

  best.validate();
  return best;
}

Reranker::Reranker(const ModelParameters &params, const EntityVocabulary &vocab,
                   const std::vector<LibraryDocument> &docs,
                   const StopwordSet &stopwords)
    : params_(params),
      encoder_(params.feature_dim, params.hash_seed,
               params.max_tokens_per_side, vocab),
      stopwords_(stopwords) {
  params_.validate();
  doc_by_name_.reserve(docs.size());
  for (const auto &doc : docs) doc_by_name_.emplace(doc.library, &doc);
}

Reranker::Reranker(const ModelParameters &params, const EntityVocabulary &vocab,
                   const std::vector<LibraryDocument> &docs)
    : Reranker(params, vocab, docs, default_stopwords()) {}

std::vector<std::string>
Reranker::query_tokens(const std::string &description) const {
  return clean_text(description, stopwords_);
}

const LibraryDocument &Reranker::doc_for(const std::string &library) const {
  auto it = doc_by_name_.find(library);
  if (it == doc_by_name_.end())
    throw ValidationError("no document for library: " + library);
  return *it->second;
}

std::vector<ScoredLibrary> Reranker::rank(const std::string &description,
                                          const CandidateSet &candidates,
                                          size_t k) const {
  if (k == 0) throw ValidationError("rank requires k >= 1");
  if (candidates.empty()) return {};
  const std::vector<std::string> q_tokens = query_tokens(description);
  std::vector<ScoredLibrary> scored;
  scored.reserve(candidates.size());
  for (const auto &cand : candidates.candidates) {
    const PairEncoding enc =
        encoder_.encode(q_tokens, doc_for(cand.library), cand.score);
    scored.push_back(ScoredLibrary{cand.library, score_pair(enc, params_)});
  }
  return order_by_score(std::move(scored), k);
}

double Reranker::score_one(const std::string &description,
                           const std::string &library,
                           double screener_score) const {
  const PairEncoding enc = encoder_.encode(query_tokens(description),
                                           doc_for(library), screener_score);
  return score_pair(enc, params_);
}

std::string model_to_json(const ModelParameters &params) {
  params.validate();
  nlohmann::json j;
  j["format_version"] = 1;
  j["feature_dim"] = params.feature_dim;
  j["hidden_dim"] = params.hidden_dim;
  j["hash_seed"] = params.hash_seed;
  j["max_tokens_per_side"] = params.max_tokens_per_side;
  j["w1"] = params.w1;
  j["b1"] = params.b1;
  j["w2"] = params.w2;
  j["b2"] = params.b2;
  return j.dump();
}

ModelParameters model_from_json(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1)
      throw ParseError("unsupported model format_version");
    ModelParameters p;
    p.feature_dim = j.at("feature_dim").get<uint32_t>();
    p.hidden_dim = j.at("hidden_dim").get<uint32_t>();
    p.hash_seed = j.at("hash_seed").get<uint64_t>();
    p.max_tokens_per_side = j.at("max_tokens_per_side").get<uint32_t>();
    p.w1 = j.at("w1").get<std::vector<double>>();
    p.b1 = j.at("b1").get<std::vector<double>>();
    p.w2 = j.at("w2").get<std::vector<double>>();
    p.b2 = j.at("b2").get<double>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("model file is missing fields: ") + e.what());
  }
}

void save_model(const ModelParameters &params, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open model file for write: " + path);
  out << model_to_json(params) << "\n";
  if (!out) throw ValidationError("write failed: " + path);
}

ModelParameters load_model(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

} // namespace vulnlink
