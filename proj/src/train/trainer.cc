// train/trainer.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "train/trainer.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include "synthtask/manifest.h"
#include "train/adam.h"
#include "train/batcher.h"
#include "util/error.h"
#include "util/io.h"
#include "util/strings.h"

namespace cjt::train {

using cjt::model::average_checkpoints;
using cjt::model::Checkpoint;
using cjt::numerics::GraphF;
using cjt::numerics::Tensor;
using cjt::pairgen::PairRecord;
using cjt::pairgen::PairSet;
using cjt::synthtask::AudioRef;
using cjt::util::derive_seed;
using cjt::util::fmt_fixed;
using cjt::util::Rng;

GatePolicy::GatePolicy(uint64_t seed, const std::string& stream, double close_prob)
    : rng_(derive_seed(seed, stream)), close_prob_(close_prob) {}

bool GatePolicy::draw_open() { return !rng_.bernoulli(close_prob_); }

std::string render_train_log(const std::vector<TrainLogEntry>& log) {
  std::ostringstream os;
  os << "# update\tprovenance\tloss\tlr\tgate\tmask_rate\n";
  for (const TrainLogEntry& e : log) {
    os << e.update << '\t' << e.provenance << '\t' << fmt_fixed(e.loss, 6) << '\t'
       << fmt_fixed(e.lr, 8) << '\t' << (e.gate_open ? "open" : "closed") << '\t'
       << fmt_fixed(e.mask_rate, 4) << '\n';
  }
  return os.str();
}

namespace {

std::vector<int> target_lengths(const PairSet& pairs) {
  std::vector<int> out;
  out.reserve(pairs.records.size());
  for (const PairRecord& r : pairs.records) out.push_back(static_cast<int>(r.target.size()));
  return out;
}

bool augmentable(const AudioRef& ref, bool specaug_synth) {
  switch (ref.kind) {
    case AudioRef::Kind::file:
      return true;  // materialized dumps hold real-profile audio
    case AudioRef::Kind::render:
      return ref.profile != "tts" || specaug_synth;
    case AudioRef::Kind::none:
      return false;
  }
  return false;
}

}  // namespace

Trainer::Trainer(cjt::model::AsrModel& model, const TrainConfig& cfg,
                 const cjt::synthtask::Profiles& profiles, const cjt::synthtask::Vocab& vocab,
                 std::string root)
    : model_(model), cfg_(cfg), profiles_(profiles), vocab_(vocab), root_(std::move(root)) {
  cfg_.validate();
}

Trainer::StepStats Trainer::accumulate(const PairSet& pairs, const std::vector<int>& batch,
                                       bool gate_open, const MaskPlans* plans, double loss_scale,
                                       Rng& dropout_rng, Rng& specaug_rng) {
  if (batch.empty()) throw ConfigError("empty batch");
  const std::string& provenance = pairs.records[static_cast<size_t>(batch[0])].provenance;

  StepStats stats;
  double loss_sum = 0.0;
  for (int idx : batch) {
    const PairRecord& r = pairs.records[static_cast<size_t>(idx)];
    if (r.provenance != provenance)
      throw Error("mixed-provenance batch: '" + r.provenance + "' next to '" + provenance + "'");
    if (r.target.empty()) throw Error("record '" + r.id + "' has an empty target");
    last_batch_ids_.push_back(r.id);

    Tensor<float> feats =
        cjt::synthtask::load_audio(r.audio, vocab_.decode(r.target), profiles_, vocab_, root_);
    if (augmentable(r.audio, cfg_.specaug_synth))
      feats = cjt::synthtask::spec_augment(feats, specaug_, specaug_rng);

    const MaskPlan* plan = nullptr;
    if (plans) {
      auto it = plans->by_id.find(r.id);
      if (it == plans->by_id.end()) throw ConfigError("no mask plan for record '" + r.id + "'");
      if (it->second.masked.size() != r.target.size())
        throw ConfigError("mask plan for '" + r.id + "' does not match its target length");
      plan = &it->second;
    }

    // History is BOS + target with masked tokens replaced by PAD; the loss
    // rows are target + EOS with masked positions excluded. A masked
    // token's value therefore cannot reach the update at all.
    size_t len = r.target.size();
    std::vector<int> history(len + 1);
    std::vector<int> targets(len + 1);
    std::vector<uint8_t> exclude(len + 1, 0);
    history[0] = cjt::synthtask::kBos;
    for (size_t i = 0; i < len; ++i) {
      bool m = plan && plan->masked[i];
      history[i + 1] = m ? cjt::synthtask::kPad : r.target[i];
      targets[i] = r.target[i];
      exclude[i] = m ? 1 : 0;
      stats.masked_tokens += m;
    }
    targets[len] = cjt::synthtask::kEos;
    stats.target_tokens += static_cast<long long>(len);

    GraphF g(GraphF::Mode::train, &dropout_rng);
    bool enc_gate = cfg_.syngr_scope == "all" ? true : gate_open;
    auto enc = model_.encode(g, feats, {}, enc_gate, /*want_taps=*/false);
    if (cfg_.syngr_scope == "all") enc.memory = g.grad_gate(enc.memory, gate_open);
    GraphF::Var logits = model_.decode_logits(g, enc, history);
    auto ce = g.smoothed_cross_entropy(logits, targets, cfg_.label_smoothing, exclude);
    if (!ce.all_excluded) g.backward(ce.loss, static_cast<float>(loss_scale));
    loss_sum += static_cast<double>(g.value(ce.loss).at(0, 0));
  }
  stats.loss = loss_sum / static_cast<double>(batch.size());
  stats.mask_rate = stats.target_tokens == 0
                        ? 0.0
                        : static_cast<double>(stats.masked_tokens) / stats.target_tokens;
  return stats;
}

RoundResult Trainer::train_supervised(const PairSet& gold, int updates, const std::string& tag) {
  TrainConfig c = cfg_;
  c.lambda_ratio = 0;
  c.lambda_as_loss_weight = false;
  return run_with(c, gold, nullptr, /*syngr_active=*/false, nullptr, updates, tag);
}

RoundResult Trainer::run_round(const PairSet& speech, const PairSet& text, int round,
                               const MaskPlans* plans, int updates, const std::string& tag) {
  if (round != 1 && round != 2) throw ConfigError("round must be 1 or 2");
  if (round == 1 && plans != nullptr)
    throw ConfigError("round 1 trains on unmasked pseudo-labels; mask plans belong to round 2");
  if (round == 2 && cfg_.mask_strategy != "none" && plans == nullptr)
    throw ConfigError("round 2 with mask_strategy '" + cfg_.mask_strategy + "' needs mask plans");
  bool syngr_active = cfg_.syngr_scope != "none" && (round == 2 || cfg_.syngr_round1);
  return run_with(cfg_, speech, &text, syngr_active, plans, updates, tag);
}

RoundResult Trainer::run_with(const TrainConfig& cfg, const PairSet& speech, const PairSet* text,
                              bool syngr_active, const MaskPlans* plans, int updates,
                              const std::string& tag) {
  if (updates < 1) throw ConfigError("updates must be >= 1");
  int lambda = cfg.lambda_ratio;
  bool joint = lambda > 0 && !cfg.lambda_as_loss_weight;
  bool weighted = lambda > 0 && cfg.lambda_as_loss_weight;
  if ((joint || weighted) && (text == nullptr || text->records.empty()))
    throw ConfigError("joint training schedules SynA-text batches but the text set is empty");

  BatchCursor speech_cur(target_lengths(speech), cfg.batch_size, cfg.seed, tag + ".speech");
  std::optional<BatchCursor> text_cur;
  if (joint || weighted)
    text_cur.emplace(target_lengths(*text), cfg.batch_size, cfg.seed, tag + ".text");

  Rng dropout_rng(derive_seed(cfg.seed, tag + ".dropout"));
  Rng specaug_rng(derive_seed(cfg.seed, tag + ".specaug"));
  GatePolicy gate(cfg.seed, tag + ".syngr", cfg.syngr_prob);
  Adam adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  cjt::model::ParamStore& store = model_.params();

  RoundResult res;
  for (int u = 0; u < updates; ++u) {
    double lr = cfg.schedule.lr_at(u, updates);
    store.zero_grads();
    last_batch_ids_.clear();

    TrainLogEntry e;
    e.update = u + 1;
    e.lr = lr;
    if (weighted) {
      const std::vector<int>& sb = speech_cur.next();
      StepStats ss = accumulate(speech, sb, /*gate_open=*/true, plans,
                                1.0 / static_cast<double>(sb.size()), dropout_rng, specaug_rng);
      bool open = syngr_active ? gate.draw_open() : true;
      const std::vector<int>& tb = text_cur->next();
      StepStats ts = accumulate(*text, tb, open, nullptr,
                                static_cast<double>(lambda) / static_cast<double>(tb.size()),
                                dropout_rng, specaug_rng);
      e.provenance = "joint";
      e.loss = ss.loss + lambda * ts.loss;
      e.gate_open = open;
      e.mask_rate = ss.mask_rate;
    } else if (joint && u % (1 + lambda) != 0) {
      bool open = syngr_active ? gate.draw_open() : true;
      const std::vector<int>& tb = text_cur->next();
      StepStats ts = accumulate(*text, tb, open, nullptr,
                                1.0 / static_cast<double>(tb.size()), dropout_rng, specaug_rng);
      e.provenance = text->records[static_cast<size_t>(tb[0])].provenance;
      e.loss = ts.loss;
      e.gate_open = open;
    } else {
      const std::vector<int>& sb = speech_cur.next();
      StepStats ss = accumulate(speech, sb, /*gate_open=*/true, plans,
                                1.0 / static_cast<double>(sb.size()), dropout_rng, specaug_rng);
      e.provenance = speech.records[static_cast<size_t>(sb[0])].provenance;
      e.loss = ss.loss;
      e.mask_rate = ss.mask_rate;
    }

    if (!std::isfinite(e.loss) || !store.grads_all_finite()) {
      fault_dump(tag, e.update, e.provenance, e.loss, lr);
      throw NumericalFault("non-finite loss or gradient at update " + std::to_string(e.update) +
                           " of '" + tag + "'");
    }
    adam.step(store, lr);
    res.log.push_back(e);
    if (e.update % cfg.checkpoint_interval == 0 && e.update < updates)
      res.checkpoints.push_back(model_.snapshot(static_cast<uint64_t>(e.update), tag));
  }
  res.checkpoints.push_back(model_.snapshot(static_cast<uint64_t>(updates), tag));

  size_t take = std::min(static_cast<size_t>(cfg.average_last), res.checkpoints.size());
  std::vector<Checkpoint> tail(res.checkpoints.end() - static_cast<long>(take),
                               res.checkpoints.end());
  res.averaged = average_checkpoints(tail);
  return res;
}

void Trainer::fault_dump(const std::string& tag, long long update, const std::string& provenance,
                         double loss, double lr) const {
  if (root_.empty()) return;
  std::ostringstream os;
  os << "run\t" << tag << "\n"
     << "update\t" << update << "\n"
     << "provenance\t" << provenance << "\n"
     << "loss\t" << loss << "\n"
     << "lr\t" << fmt_fixed(lr, 8) << "\n"
     << "grads_finite\t" << (model_.params().grads_all_finite() ? "yes" : "no") << "\n";
  for (const std::string& id : last_batch_ids_) os << "record\t" << id << "\n";
  std::string dir = root_ + "/diagnostics";
  cjt::util::ensure_dir(dir);
  cjt::util::write_text_file(dir + "/fault-" + tag + "-u" + std::to_string(update) + ".txt",
                             os.str());
}

RoundResult train_lm(cjt::model::LmModel& lm, const std::vector<std::vector<int>>& sequences,
                     const TrainConfig& cfg, const std::string& root, const std::string& tag) {
  cfg.validate();
  std::vector<int> lengths;
  lengths.reserve(sequences.size());
  for (const auto& s : sequences) {
    if (s.empty()) throw ConfigError("lm training sequence is empty");
    lengths.push_back(static_cast<int>(s.size()));
  }
  BatchCursor cursor(lengths, cfg.batch_size, cfg.seed, tag + ".lm");
  Rng dropout_rng(derive_seed(cfg.seed, tag + ".dropout"));
  Adam adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  cjt::model::ParamStore& store = lm.params();

  int updates = cfg.updates_lm;
  RoundResult res;
  for (int u = 0; u < updates; ++u) {
    double lr = cfg.schedule.lr_at(u, updates);
    store.zero_grads();
    const std::vector<int>& batch = cursor.next();

    double loss_sum = 0.0;
    for (int idx : batch) {
      const std::vector<int>& toks = sequences[static_cast<size_t>(idx)];
      std::vector<int> history(toks.size() + 1);
      std::vector<int> targets(toks.size() + 1);
      history[0] = cjt::synthtask::kBos;
      std::copy(toks.begin(), toks.end(), history.begin() + 1);
      std::copy(toks.begin(), toks.end(), targets.begin());
      targets[toks.size()] = cjt::synthtask::kEos;

      GraphF g(GraphF::Mode::train, &dropout_rng);
      GraphF::Var logits = lm.forward(g, history);
      auto ce = g.smoothed_cross_entropy(logits, targets, cfg.label_smoothing, {});
      g.backward(ce.loss, static_cast<float>(1.0 / static_cast<double>(batch.size())));
      loss_sum += static_cast<double>(g.value(ce.loss).at(0, 0));
    }
    double loss = loss_sum / static_cast<double>(batch.size());
    if (!std::isfinite(loss) || !store.grads_all_finite()) {
      if (!root.empty()) {
        std::string dir = root + "/diagnostics";
        cjt::util::ensure_dir(dir);
        cjt::util::write_text_file(
            dir + "/fault-" + tag + "-u" + std::to_string(u + 1) + ".txt",
            "run\t" + tag + "\nupdate\t" + std::to_string(u + 1) + "\nloss\t" +
                std::to_string(loss) + "\n");
      }
      throw NumericalFault("non-finite loss or gradient at update " + std::to_string(u + 1) +
                           " of '" + tag + "'");
    }
    adam.step(store, lr);
    res.log.push_back({u + 1, "unpaired-text", loss, lr, true, 0.0});
    if ((u + 1) % cfg.checkpoint_interval == 0 && u + 1 < updates)
      res.checkpoints.push_back(lm.snapshot(static_cast<uint64_t>(u + 1), tag));
  }
  res.checkpoints.push_back(lm.snapshot(static_cast<uint64_t>(updates), tag));

  size_t take = std::min(static_cast<size_t>(cfg.average_last), res.checkpoints.size());
  std::vector<Checkpoint> tail(res.checkpoints.end() - static_cast<long>(take),
                               res.checkpoints.end());
  res.averaged = average_checkpoints(tail);
  return res;
}

}  // namespace cjt::train
