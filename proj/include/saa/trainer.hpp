#pragma once

// The training loop. Each iteration:
//
//   1. lr = cosine_lr(g, epochs*iters_per_epoch, base_lr), g = global iter
//   2. labeled ids: position p = g*|Bx| + slot indexes a shuffled order that
//      reshuffles on wraparound (stream LabeledShuffle, index p / n_labeled)
//   3. unlabeled ids: |Bu| = ratio*|Bx| draws with replacement from
//      uniform_int over [0, n_unlabeled) (stream UnlabeledSample, index g)
//   4. labeled slot s: weak view (stream AugLabeled (g,s)), cross entropy
//      vs. the label, gradient weight 1/|Bx|
//   5. unlabeled slot s: weak view (stream AugWeak (g,s)) gives the pseudo
//      label; the training view (stream AugStrong (g,s)) is diverse when the
//      sample is marked naive and epoch >= warmup, else plain strong; the
//      pre-mask cross entropy vs. the pseudo label is recorded into the
//      history (slot order), and accepted samples contribute gradient
//      weight lambda/|Bu|
//   6. one SGD-momentum step on the summed gradient, then parameter EMA
//
// At each epoch boundary markers are refreshed from the histories (stream
// Markers, index epoch) and the EMA model is evaluated on the test set.
//
// Work inside an iteration is split into a FIXED number of chunks whose
// partial gradients merge in chunk order, so results are bit-identical for
// any thread count.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "saa/augment.hpp"
#include "saa/checkpoint.hpp"
#include "saa/config.hpp"
#include "saa/data.hpp"
#include "saa/errors.hpp"
#include "saa/history.hpp"
#include "saa/loss.hpp"
#include "saa/metrics.hpp"
#include "saa/net.hpp"
#include "saa/optim.hpp"
#include "saa/parallel.hpp"
#include "saa/rng.hpp"

namespace saa {

enum class AugChoice { Strong, Diverse };

inline AugChoice select_augmentation(bool naive, std::uint64_t epoch, int warmup_epochs) {
  return naive && epoch >= static_cast<std::uint64_t>(warmup_epochs) ? AugChoice::Diverse
                                                                     : AugChoice::Strong;
}

struct EpochAudit {
  std::uint64_t strong = 0;
  std::uint64_t diverse = 0;    // image-level regrouping
  std::uint64_t patchwise = 0;  // halve-then-augment comparison mode
};

template <typename T>
class Trainer {
public:
  Trainer(const TrainConfig& cfg, Dataset labeled, Dataset unlabeled, Dataset test)
      : cfg_(cfg),
        labeled_(std::move(labeled)),
        unlabeled_(std::move(unlabeled)),
        test_(std::move(test)),
        policy_(cfg.selection_policy()),
        aug_(cfg.augment_policy()),
        history_(unlabeled_.size(), cfg.history_decay) {
    cfg_.validate();
    if (!labeled_.labeled()) throw ConfigError("trainer: labeled set has no labels");
    if (labeled_.size() == 0 || unlabeled_.size() == 0 || test_.size() == 0)
      throw ConfigError("trainer: empty dataset");
    arch_.channels = unlabeled_.channels;
    arch_.height = unlabeled_.height;
    arch_.width = unlabeled_.width;
    arch_.classes = labeled_.classes;
    arch_.validate();

    auto init_stream = rng::stream(cfg_.seed, rng::Stream::WeightInit);
    params_ = init_params<T>(arch_, init_stream);
    ema_ = params_;
    velocity_ = NetParams<T>(arch_);

    chunk_ws_.resize(kChunks);
    for (auto& ws : chunk_ws_) ws.resize(arch_);
    chunk_grads_.assign(kChunks, NetParams<T>(arch_));
    grads_ = NetParams<T>(arch_);
  }

  const ArchConfig& arch() const { return arch_; }
  std::uint64_t epoch() const { return epoch_; }
  std::uint64_t iteration() const { return iter_; }
  const SampleHistory& history() const { return history_; }
  const NetParams<T>& params() const { return params_; }
  const NetParams<T>& ema_params() const { return ema_; }
  const std::vector<MetricsRow>& records() const { return records_; }
  const std::vector<EpochAudit>& audits() const { return audits_; }

  double evaluate() {
    if (test_.size() == 0) throw TrainError("evaluate: empty test set");
    std::vector<std::uint64_t> correct(kChunks, 0);
    parallel_ranges(test_.size(), kChunks, cfg_.threads,
                    [&](std::size_t b, std::size_t e, std::size_t ci) {
                      for (std::size_t i = b; i < e; ++i) {
                        Image img = test_.image(i);
                        if (predict_class(arch_, ema_, img, chunk_ws_[ci]) ==
                            static_cast<std::size_t>(test_.labels[i]))
                          ++correct[ci];
                      }
                    });
    std::uint64_t total = std::accumulate(correct.begin(), correct.end(), std::uint64_t{0});
    return static_cast<double>(total) / static_cast<double>(test_.size());
  }

  void train_epoch() {
    auto t0 = std::chrono::steady_clock::now();
    double sup_sum = 0.0, unsup_sum = 0.0, mask_sum = 0.0, last_lr = 0.0;
    EpochAudit audit;
    for (int i = 0; i < cfg_.iters_per_epoch; ++i)
      train_iteration(sup_sum, unsup_sum, mask_sum, last_lr, audit);

    auto marker_rng = rng_for(rng::Stream::Markers, epoch_);
    update_markers(history_, policy_, marker_rng, cfg_.otsu_bins);

    MetricsRow row;
    row.epoch = epoch_;
    row.iteration = iter_;
    row.test_acc = evaluate();
    row.sup_loss = sup_sum / cfg_.iters_per_epoch;
    row.unsup_loss = unsup_sum / cfg_.iters_per_epoch;
    row.mask_rate = mask_sum / cfg_.iters_per_epoch;
    row.naive_fraction = naive_fraction(history_);
    row.lr = last_lr;
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    records_.push_back(row);
    audits_.push_back(audit);
    ++epoch_;
  }

  void run(const std::function<void(const MetricsRow&)>& on_epoch = {}) {
    while (epoch_ < static_cast<std::uint64_t>(cfg_.epochs)) {
      train_epoch();
      if (on_epoch) on_epoch(records_.back());
    }
  }

  void save(const std::string& path) const {
    Checkpoint<T> ck;
    ck.epoch = epoch_;
    ck.iteration = iter_;
    ck.params = params_;
    ck.ema = ema_;
    ck.velocity = velocity_;
    ck.history = history_;
    save_checkpoint(path, arch_, ck);
  }

  void restore(const std::string& path) {
    Checkpoint<T> ck = load_checkpoint<T>(path, arch_, cfg_.history_decay);
    if (ck.history.size() != unlabeled_.size())
      throw IoError(path + ": history size does not match the unlabeled set");
    epoch_ = ck.epoch;
    iter_ = ck.iteration;
    params_ = std::move(ck.params);
    ema_ = std::move(ck.ema);
    velocity_ = std::move(ck.velocity);
    history_ = std::move(ck.history);
  }

private:
  static constexpr std::size_t kChunks = 8;

  std::mt19937_64 rng_for(rng::Stream tag, std::uint64_t a = 0, std::uint64_t b = 0) const {
    return rng::stream(cfg_.seed, tag, a, b);
  }

  std::size_t labeled_id(std::uint64_t pos) {
    std::uint64_t wrap = pos / labeled_.size();
    if (wrap != order_wrap_ || order_.empty()) {
      order_.resize(labeled_.size());
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      auto s = rng_for(rng::Stream::LabeledShuffle, wrap);
      std::shuffle(order_.begin(), order_.end(), s);
      order_wrap_ = wrap;
    }
    return order_[pos % labeled_.size()];
  }

  void train_iteration(double& sup_sum, double& unsup_sum, double& mask_sum,
                       double& last_lr, EpochAudit& audit) {
    const std::uint64_t g = iter_;
    const std::size_t bx = static_cast<std::size_t>(cfg_.batch_labeled);
    const std::size_t bu = bx * static_cast<std::size_t>(cfg_.unlabeled_ratio);
    const std::uint64_t total_steps =
        static_cast<std::uint64_t>(cfg_.epochs) * cfg_.iters_per_epoch;
    const double lr = cosine_lr(g, total_steps, cfg_.base_lr);

    std::vector<std::size_t> lab_ids(bx);
    for (std::size_t s = 0; s < bx; ++s) lab_ids[s] = labeled_id(g * bx + s);
    std::vector<std::size_t> unl_ids(bu);
    {
      auto s = rng_for(rng::Stream::UnlabeledSample, g);
      std::uniform_int_distribution<std::size_t> pick(0, unlabeled_.size() - 1);
      for (std::size_t i = 0; i < bu; ++i) unl_ids[i] = pick(s);
    }

    for (auto& cg : chunk_grads_) cg.fill(T(0));

    std::vector<double> sup_losses(bx, 0.0);
    parallel_ranges(bx, kChunks, cfg_.threads,
                    [&](std::size_t b, std::size_t e, std::size_t ci) {
                      for (std::size_t s = b; s < e; ++s) {
                        auto ar = rng_for(rng::Stream::AugLabeled, g, s);
                        Image img = weak_augment(labeled_.image(lab_ids[s]), ar);
                        NetWorkspace<T>& ws = chunk_ws_[ci];
                        std::vector<T> probs = softmax(forward(arch_, params_, img, ws));
                        std::size_t label = static_cast<std::size_t>(labeled_.labels[lab_ids[s]]);
                        sup_losses[s] = static_cast<double>(cross_entropy(probs, label));
                        for (std::size_t k = 0; k < probs.size(); ++k)
                          ws.dlog[k] = (probs[k] - T(k == label)) / static_cast<T>(bx);
                        backward(arch_, params_, ws, ws.dlog, chunk_grads_[ci]);
                      }
                    });

    std::vector<double> raws(bu, 0.0);
    std::vector<std::uint8_t> accepted(bu, 0);
    std::vector<EpochAudit> chunk_audit(kChunks);
    parallel_ranges(bu, kChunks, cfg_.threads,
                    [&](std::size_t b, std::size_t e, std::size_t ci) {
                      for (std::size_t s = b; s < e; ++s) {
                        std::size_t id = unl_ids[s];
                        Image base = unlabeled_.image(id);
                        NetWorkspace<T>& ws = chunk_ws_[ci];

                        auto wr = rng_for(rng::Stream::AugWeak, g, s);
                        std::vector<T> probs_w =
                            softmax(forward(arch_, params_, weak_augment(base, wr), ws));
                        PseudoLabel pl = pseudo_label(probs_w, cfg_.confidence);

                        auto sr = rng_for(rng::Stream::AugStrong, g, s);
                        Image view;
                        if (select_augmentation(history_.f[id] != 0, epoch_,
                                                cfg_.warmup_epochs) == AugChoice::Strong) {
                          view = strong_augment(base, aug_, sr);
                          ++chunk_audit[ci].strong;
                        } else if (cfg_.patchwise) {
                          view = patchwise_diverse_augment(base, aug_, sr);
                          ++chunk_audit[ci].patchwise;
                        } else {
                          view = diverse_augment(base, aug_, sr);
                          ++chunk_audit[ci].diverse;
                        }

                        std::vector<T> probs_s =
                            softmax(forward(arch_, params_, view, ws));
                        raws[s] = static_cast<double>(cross_entropy(probs_s, pl.cls));
                        accepted[s] = pl.accepted ? 1 : 0;
                        if (pl.accepted && cfg_.lambda > 0.0) {
                          for (std::size_t k = 0; k < probs_s.size(); ++k)
                            ws.dlog[k] = static_cast<T>(cfg_.lambda) *
                                         (probs_s[k] - T(k == pl.cls)) / static_cast<T>(bu);
                          backward(arch_, params_, ws, ws.dlog, chunk_grads_[ci]);
                        }
                      }
                    });

    grads_.fill(T(0));
    for (auto& cg : chunk_grads_) grads_.accumulate(cg);
    for (const auto& ca : chunk_audit) {
      audit.strong += ca.strong;
      audit.diverse += ca.diverse;
      audit.patchwise += ca.patchwise;
    }

    double sup = std::accumulate(sup_losses.begin(), sup_losses.end(), 0.0) /
                 static_cast<double>(bx);
    double unsup = 0.0;
    std::size_t n_accepted = 0;
    std::string bad_ids;
    for (std::size_t s = 0; s < bu; ++s) {
      if (!std::isfinite(raws[s])) {
        bad_ids += (bad_ids.empty() ? "" : ",") + std::to_string(unl_ids[s]);
        continue;
      }
      if (accepted[s]) {
        unsup += raws[s];
        ++n_accepted;
      }
    }
    unsup /= static_cast<double>(bu);
    if (!bad_ids.empty() || !std::isfinite(sup))
      throw TrainError("iteration " + std::to_string(g) + ": non-finite loss (sup=" +
                       std::to_string(sup) + "); sample ids: " + bad_ids);

    for (std::size_t s = 0; s < bu; ++s) history_.record(unl_ids[s], raws[s]);

    sgd_momentum_step(params_, velocity_, grads_, lr, cfg_.momentum, cfg_.weight_decay);
    ema_update(ema_, params_, cfg_.ema_decay);

    sup_sum += sup;
    unsup_sum += unsup;
    mask_sum += static_cast<double>(n_accepted) / static_cast<double>(bu);
    last_lr = lr;
    ++iter_;
  }

  TrainConfig cfg_;
  Dataset labeled_, unlabeled_, test_;
  SelectionPolicy policy_;
  AugmentPolicy aug_;
  ArchConfig arch_;
  NetParams<T> params_, ema_, velocity_, grads_;
  SampleHistory history_;
  std::uint64_t epoch_ = 0;
  std::uint64_t iter_ = 0;
  std::vector<std::size_t> order_;
  std::uint64_t order_wrap_ = ~std::uint64_t{0};
  std::vector<NetWorkspace<T>> chunk_ws_;
  std::vector<NetParams<T>> chunk_grads_;
  std::vector<MetricsRow> records_;
  std::vector<EpochAudit> audits_;
};

} // namespace saa
