// Copyright 2026 The pbel Authors.
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

#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "pbel/encoder/model.hpp"
#include "pbel/numerics/adam.hpp"

namespace pbel {

struct TrainingConfig {
  ReprKind kind = ReprKind::kGrapheme;
  ModelDims dims;
  double margin = 0.5;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  std::size_t patience = 5;
  double dev_fraction = 0.05;
  double clip_norm = 5.0;

  void validate() const {
    if (!(margin > 0.0)) throw InvalidArgument("training: margin must be positive");
    if (batch_size < 2) throw InvalidArgument("training: batch_size must be at least 2");
    if (max_epochs == 0) throw InvalidArgument("training: max_epochs must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("training: learning rate must be positive");
    if (dev_fraction < 0.0 || dev_fraction >= 1.0) {
      throw InvalidArgument("training: dev_fraction must be in [0, 1)");
    }
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double dev_accuracy = 0.0;
  double dev_loss = 0.0;
};

struct TrainResult {
  EncoderParams<float> params;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  double best_dev_accuracy = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

struct RetrievalMetrics {
  double accuracy = 0.0;  // rows whose best column (lowest index on ties) is the diagonal
  double loss = 0.0;      // in-batch hinge over the whole set
};

// Scores src[i] against every en[j] with one square cosine matrix.
template <typename Scalar>
RetrievalMetrics retrieval_metrics(const EncoderParams<Scalar>& params,
                                   std::span<const SeqRepr> src, std::span<const SeqRepr> en,
                                   double margin) {
  if (src.size() != en.size()) throw InvalidArgument("retrieval: side sizes differ");
  if (src.empty()) return {};
  nn::Graph<Scalar> g;
  std::vector<const SeqRepr*> s, e;
  for (const auto& x : src) s.push_back(&x);
  for (const auto& x : en) e.push_back(&x);
  const nn::NodeId vs = encode_batch(g, params.src, params.kind, params.src_vocab,
                                     std::span<const SeqRepr* const>(s));
  const nn::NodeId ve = encode_batch(g, params.en, params.kind, params.en_vocab,
                                     std::span<const SeqRepr* const>(e));
  const nn::NodeId sims_id =
      nn::matmul_nt(g, nn::row_normalize(g, vs), nn::row_normalize(g, ve));
  const auto& sims = g.value(sims_id);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < sims.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < sims.cols(); ++j) {
      if (sims(i, j) > sims(i, best)) best = j;
    }
    if (best == i) ++correct;
  }
  RetrievalMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(sims.rows());
  if (src.size() >= 2) {
    m.loss = g.value(nn::in_batch_hinge(g, sims_id, static_cast<Scalar>(margin))).item();
  }
  return m;
}

template <typename Scalar>
double retrieval_accuracy(const EncoderParams<Scalar>& params, std::span<const SeqRepr> src,
                          std::span<const SeqRepr> en) {
  return retrieval_metrics(params, src, en, params.margin).accuracy;
}

// Trains a source/English encoder pair on `corpus` plus any `extra` corpora
// (concatenated into one pool). A seeded shuffle holds out `dev_fraction` of
// the pool for model selection; the parameters from the epoch with the best
// dev retrieval accuracy are returned, lower dev loss breaking ties (a small
// dev split saturates early). Training stops after `patience` epochs without
// improvement.
inline TrainResult train(const TrainingConfig& config, const ParallelTitleCorpus& corpus,
                         std::span<const ParallelTitleCorpus> extra = {},
                         const FeatureTable* table = nullptr,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  ParallelTitleCorpus pool(corpus.src_lang(), corpus.en_lang());
  pool.append(corpus);
  for (const auto& c : extra) pool.append(c);
  if (pool.size() < config.batch_size || pool.size() < 2) {
    throw InvalidArgument("training: " + std::to_string(pool.size()) +
                          " pairs is fewer than the batch size " +
                          std::to_string(config.batch_size));
  }
  if (config.kind != ReprKind::kGrapheme && !table) {
    throw InvalidArgument("training: phoneme and articulatory models need a feature table");
  }

  auto [src_vocab, en_vocab] = build_vocab(pool, config.kind, table);
  std::vector<SeqRepr> src, en;
  for (const auto& p : pool.pairs()) {
    src.push_back(represent(p.src, config.kind, src_vocab, table));
    en.push_back(represent(p.en, config.kind, en_vocab, table));
  }

  nn::Rng rng(config.seed);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::size_t dev_n = 0;
  if (config.dev_fraction > 0.0) {
    dev_n = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(config.dev_fraction * pool.size())));
    if (pool.size() - dev_n < 2) dev_n = 0;
  }
  std::vector<SeqRepr> dev_src, dev_en;
  for (std::size_t i = 0; i < dev_n; ++i) {
    dev_src.push_back(src[order[i]]);
    dev_en.push_back(en[order[i]]);
  }
  std::vector<std::size_t> train_ids(order.begin() + static_cast<std::ptrdiff_t>(dev_n),
                                     order.end());

  TrainResult result;
  result.params = EncoderParams<float>::init(config.kind, config.dims, std::move(src_vocab),
                                             std::move(en_vocab), rng.next(),
                                             table ? table->fingerprint() : 0);
  result.params.margin = config.margin;
  result.params.src_lang = pool.src_lang();
  result.params.en_lang = pool.en_lang();

  EncoderParams<float> params = result.params;
  auto plist = params.parameters();
  const std::span<nn::Parameter<float>* const> pspan(plist);
  nn::AdamState<float> adam(nn::AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
  double best = -1.0;
  double best_loss = 0.0;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(train_ids);
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t start = 0; start < train_ids.size(); start += config.batch_size) {
      batches.emplace_back(start, std::min(train_ids.size(), start + config.batch_size));
    }
    // A trailing batch of one has no negatives; fold it into its predecessor.
    if (batches.size() > 1 && batches.back().second - batches.back().first < 2) {
      batches[batches.size() - 2].second = batches.back().second;
      batches.pop_back();
    }

    double loss_sum = 0.0;
    for (const auto& [lo, hi] : batches) {
      std::vector<const SeqRepr*> bs, be;
      for (std::size_t k = lo; k < hi; ++k) {
        bs.push_back(&src[train_ids[k]]);
        be.push_back(&en[train_ids[k]]);
      }
      nn::Graph<float> g;
      const nn::NodeId loss = build_batch_loss(
          g, params, std::span<const SeqRepr* const>(bs), std::span<const SeqRepr* const>(be),
          static_cast<float>(config.margin));
      const float value = g.value(loss).item();
      if (!std::isfinite(value)) throw NumericsError("training: non-finite loss");
      nn::zero_grads(pspan);
      g.backward(loss);
      if (!nn::grads_finite(pspan)) throw NumericsError("training: non-finite gradient");
      nn::clip_grad_norm(pspan, config.clip_norm);
      nn::adam_step(pspan, adam);
      loss_sum += value;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(batches.size());
    if (dev_n) {
      const auto dev = retrieval_metrics<float>(params, dev_src, dev_en, config.margin);
      stats.dev_accuracy = dev.accuracy;
      stats.dev_loss = dev.loss;
    }
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);

    const bool improved =
        stats.dev_accuracy > best || (stats.dev_accuracy == best && stats.dev_loss < best_loss);
    if (dev_n == 0 || improved) {
      best = stats.dev_accuracy;
      best_loss = stats.dev_loss;
      result.best_epoch = epoch;
      result.best_dev_accuracy = stats.dev_accuracy;
      result.params = params;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace pbel
