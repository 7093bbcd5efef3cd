// pipeline/pipeline.cc

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

#include "pipeline/pipeline.h"

#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>
#include <utility>

#include "analysis/histogram.h"
#include "analysis/sweep.h"
#include "decode/beam.h"
#include "decode/report.h"
#include "decode/wer.h"
#include "model/asr_model.h"
#include "model/lm_model.h"
#include "pairgen/confidence.h"
#include "pairgen/pseudo_label.h"
#include "pairgen/synthesize.h"
#include "synthtask/corpus.h"
#include "train/trainer.h"
#include "util/error.h"
#include "util/hash.h"
#include "util/io.h"
#include "util/rng.h"
#include "util/strings.h"

namespace cjt::pipeline {

using cjt::model::AsrModel;
using cjt::model::Checkpoint;
using cjt::model::LmModel;
using cjt::pairgen::PairRecord;
using cjt::pairgen::PairSet;
using cjt::synthtask::Manifest;
using cjt::util::derive_seed;
using cjt::util::fmt_fixed;
using cjt::util::hash_combine;
using cjt::util::KvConfig;
using cjt::util::Rng;

namespace {

const std::vector<std::string> kEvalSets = {"dev-clean", "dev-other", "test-clean", "test-other"};
const std::vector<std::string> kModes = {"greedy", "fused"};

const std::map<std::string, std::vector<std::string>>& stage_sections() {
  static const std::map<std::string, std::vector<std::string>> m = {
      {"gen-data", {"corpus", "task"}},
      {"train-teacher", {"task", "model", "train"}},
      {"pseudolabel", {"task", "model", "pairgen"}},
      {"synthesize", {"pairgen"}},
      {"train-lm", {"lm", "train"}},
      {"cjt-round1", {"task", "model", "train", "pipeline"}},
      {"score-conf", {"task", "model"}},
      {"cjt-round2", {"task", "model", "train", "pipeline"}},
      {"decode", {"task", "model", "lm", "decode", "pipeline"}},
      {"score", {}},
      {"analyze", {"task", "model", "analysis"}},
  };
  return m;
}

const std::map<std::string, std::vector<std::string>>& stage_deps() {
  static const std::map<std::string, std::vector<std::string>> m = {
      {"gen-data", {}},
      {"train-teacher", {"gen-data"}},
      {"pseudolabel", {"gen-data", "train-teacher"}},
      {"synthesize", {"gen-data"}},
      {"train-lm", {"gen-data"}},
      {"cjt-round1", {"gen-data", "pseudolabel", "synthesize"}},
      {"score-conf", {"pseudolabel", "cjt-round1"}},
      {"cjt-round2", {"cjt-round1", "score-conf", "synthesize"}},
      {"decode", {"gen-data", "train-lm"}},
      {"score", {"gen-data", "decode"}},
      {"analyze", {"gen-data", "train-teacher", "cjt-round1", "score-conf"}},
  };
  return m;
}

std::string decode_model_stage(const std::string& which) {
  if (which == "teacher") return "train-teacher";
  if (which == "round1") return "cjt-round1";
  if (which == "round2") return "cjt-round2";
  throw ConfigError("pipeline.decode_model must be teacher, round1, or round2");
}

PairSet gold_to_pairs(const Manifest& gold, const cjt::synthtask::Vocab& vocab) {
  PairSet out;
  for (const auto& r : gold.records) {
    PairRecord p;
    p.id = r.id;
    p.audio = r.audio;
    p.target = vocab.encode(r.transcript);
    p.provenance = cjt::pairgen::kProvGold;
    out.records.push_back(std::move(p));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& stage_order() {
  static const std::vector<std::string> order = {
      "gen-data", "train-teacher", "pseudolabel", "synthesize", "train-lm", "cjt-round1",
      "score-conf", "cjt-round2", "decode", "score", "analyze"};
  return order;
}

int stage_pos(const std::string& name) {
  const auto& order = stage_order();
  for (size_t i = 0; i < order.size(); ++i)
    if (order[i] == name) return static_cast<int>(i);
  throw ConfigError("unknown stage '" + name + "'");
}

Pipeline::Pipeline(ExperimentPlan plan)
    : plan_(std::move(plan)),
      vocab_(cjt::synthtask::Vocab::standard()),
      task_(cjt::synthtask::TaskParams::from_kv(plan_.config)) {
  if (plan_.out.empty()) throw ConfigError("output directory required (--out)");
  for (const std::string& s : plan_.stages) stage_pos(s);
  std::sort(plan_.stages.begin(), plan_.stages.end(),
            [](const std::string& a, const std::string& b) { return stage_pos(a) < stage_pos(b); });
  plan_.stages.erase(std::unique(plan_.stages.begin(), plan_.stages.end()), plan_.stages.end());

  // The acoustic world is a pure function of (task section, seed); every
  // stage of a run must resolve render references identically.
  Rng prof_rng(derive_seed(plan_.seed, "profiles"));
  profiles_ = cjt::synthtask::make_profiles(task_, vocab_, prof_rng);

  cjt::util::ensure_dir(plan_.out);
  std::string lock = plan_.out + "/.lock";
  if (cjt::util::file_exists(lock))
    throw DependencyError("output directory is locked by another run: " + lock +
                          " (delete the file if that run is gone)");
  cjt::util::write_text_file(lock, "locked\n");
  lock_held_ = true;
}

Pipeline::~Pipeline() {
  if (lock_held_) cjt::util::remove_file(plan_.out + "/.lock");
}

uint64_t Pipeline::stage_hash(const std::string& name) const {
  uint64_t h = plan_.config.hash_sections(stage_sections().at(name));
  h = hash_combine(h, plan_.seed);
  h = hash_combine(h, cjt::util::fnv1a64(name));
  for (const std::string& dep : stage_deps().at(name)) h = hash_combine(h, stage_hash(dep));
  if (name == "decode")
    h = hash_combine(
        h, stage_hash(decode_model_stage(plan_.config.get_string("pipeline.decode_model",
                                                                 "round2"))));
  // The similarity sweep picks up the round-2 model when that stage has
  // completed, so its completion state is part of what "analyze" consumed.
  if (name == "analyze")
    h = hash_combine(h, stage_current("cjt-round2") ? stage_hash("cjt-round2") : 0);
  return h;
}

std::string Pipeline::marker_path(const std::string& name) const {
  return plan_.out + "/markers/" + name + ".done";
}

bool Pipeline::stage_current(const std::string& name) const {
  std::string path = marker_path(name);
  if (!cjt::util::file_exists(path)) return false;
  std::string want = cjt::util::hash_hex(stage_hash(name));
  for (const std::string& line : cjt::util::split(cjt::util::read_text_file(path), '\n')) {
    auto fields = cjt::util::split(line, '\t');
    if (fields.size() == 2 && fields[0] == "hash") return fields[1] == want;
  }
  return false;
}

void Pipeline::write_marker(const std::string& name) const {
  cjt::util::ensure_dir(plan_.out + "/markers");
  std::ostringstream os;
  os << "stage\t" << name << "\nhash\t" << cjt::util::hash_hex(stage_hash(name)) << "\nseed\t"
     << plan_.seed << "\n";
  cjt::util::write_text_file(marker_path(name), os.str());
}

void Pipeline::require_stage(const std::string& dep, const std::string& for_stage) const {
  if (!stage_current(dep))
    throw DependencyError("stage '" + for_stage + "' needs '" + dep +
                          "' to be completed first; run: cjt run --stages " + dep);
}

void Pipeline::run() {
  const std::vector<std::string>& stages = plan_.stages.empty() ? stage_order() : plan_.stages;

  cjt::util::write_text_file(plan_.out + "/config.resolved", plan_.config.serialize());
  std::ostringstream stamp;
  stamp << "config\t" << cjt::util::hash_hex(plan_.config.hash()) << "\nseed\t" << plan_.seed
        << "\n";
  cjt::util::write_text_file(plan_.out + "/STAMP", stamp.str());

  for (const std::string& s : stages) {
    if (!plan_.force && stage_current(s)) {
      std::cout << s << ": up to date\n";
      continue;
    }
    std::cout << s << ": running\n";
    run_stage(s);
  }
}

void Pipeline::run_stage(const std::string& name) {
  for (const std::string& dep : stage_deps().at(name)) require_stage(dep, name);

  if (name == "gen-data") gen_data();
  else if (name == "train-teacher") train_teacher();
  else if (name == "pseudolabel") pseudolabel_stage();
  else if (name == "synthesize") synthesize_stage();
  else if (name == "train-lm") train_lm_stage();
  else if (name == "cjt-round1") cjt_round(1);
  else if (name == "score-conf") score_conf_stage();
  else if (name == "cjt-round2") cjt_round(2);
  else if (name == "decode") decode_stage();
  else if (name == "score") score_stage();
  else if (name == "analyze") analyze_stage();
  else throw ConfigError("unknown stage '" + name + "'");

  write_marker(name);
}

cjt::model::AsrModelConfig Pipeline::model_cfg() const {
  cjt::model::AsrModelConfig m = cjt::model::AsrModelConfig::from_kv(plan_.config);
  // The training dropout knob reaches the model unless the model section
  // pins its own value.
  if (!plan_.config.has("model.dropout"))
    m.dropout = plan_.config.get_double("train.dropout", m.dropout);
  return m;
}

cjt::model::LmConfig Pipeline::lm_cfg() const {
  cjt::model::LmConfig m = cjt::model::LmConfig::from_kv(plan_.config);
  if (!plan_.config.has("lm.dropout"))
    m.dropout = plan_.config.get_double("train.dropout", m.dropout);
  return m;
}

cjt::train::TrainConfig Pipeline::train_cfg(const std::string& stage_tag) const {
  cjt::train::TrainConfig t = cjt::train::TrainConfig::from_kv(plan_.config);
  t.seed = derive_seed(plan_.seed, stage_tag);
  return t;
}

Manifest Pipeline::load_manifest(const std::string& name) const {
  return Manifest::load(plan_.out + "/manifests/" + name + ".tsv");
}

PairSet Pipeline::load_pairs(const std::string& file) const {
  return PairSet::load(plan_.out + "/" + file, vocab_);
}

Checkpoint Pipeline::require_ckpt(const std::string& file, const std::string& stage) const {
  std::string path = plan_.out + "/" + file;
  if (!cjt::util::file_exists(path))
    throw DependencyError("missing " + path + "; run: cjt run --stages " + stage);
  return Checkpoint::load(path);
}

std::string Pipeline::arm() const {
  std::string a = plan_.config.get_string("pipeline.arm", "cjt");
  if (a != "cjt" && a != "speech-only" && a != "syna-only")
    throw ConfigError("pipeline.arm must be cjt, speech-only, or syna-only");
  return a;
}

void Pipeline::gen_data() {
  cjt::synthtask::CorpusSizes sizes = cjt::synthtask::CorpusSizes::from_kv(plan_.config);
  cjt::synthtask::Corpus corpus =
      cjt::synthtask::generate_corpus(sizes, vocab_, derive_seed(plan_.seed, "corpus"));
  cjt::synthtask::write_corpus(corpus, profiles_, vocab_, plan_.out);
}

void Pipeline::train_teacher() {
  PairSet gold = gold_to_pairs(load_manifest("gold"), vocab_);
  AsrModel model(model_cfg());
  Rng init_rng(derive_seed(plan_.seed, "teacher.init"));
  model.init(init_rng);
  cjt::train::TrainConfig tc = train_cfg("teacher");
  cjt::train::Trainer trainer(model, tc, profiles_, vocab_, plan_.out);
  cjt::train::RoundResult res = trainer.train_supervised(gold, tc.updates_teacher, "teacher");
  cjt::util::ensure_dir(plan_.out + "/checkpoints");
  res.averaged.save(plan_.out + "/checkpoints/teacher.ckpt");
  cjt::util::ensure_dir(plan_.out + "/logs");
  cjt::util::write_text_file(plan_.out + "/logs/train-teacher.log",
                             cjt::train::render_train_log(res.log));
}

void Pipeline::pseudolabel_stage() {
  Manifest ups = load_manifest("unpaired_speech");
  AsrModel teacher(model_cfg());
  teacher.load(require_ckpt("checkpoints/teacher.ckpt", "train-teacher"));
  cjt::decode::DecodeOptions opt;
  opt.beam = static_cast<int>(plan_.config.get_int("pairgen.beam", 4));
  opt.lm_weight = 0.0;  // no LM exists yet at this point of the pipeline
  opt.max_len_factor = static_cast<int>(plan_.config.get_int("pairgen.max_len_factor", 3));
  PairSet psel =
      cjt::pairgen::pseudo_label(teacher, nullptr, ups, profiles_, vocab_, plan_.out, opt);
  cjt::util::ensure_dir(plan_.out + "/pairs");
  psel.save(plan_.out + "/pairs/speech-psel.tsv", vocab_);
}

void Pipeline::synthesize_stage() {
  Manifest ut = load_manifest("unpaired_text");
  double fraction = plan_.config.get_double("pairgen.fraction", 0.1);
  PairSet syna =
      cjt::pairgen::synthesize_pairs(ut, vocab_, fraction, derive_seed(plan_.seed, "synthesize"));
  cjt::util::ensure_dir(plan_.out + "/pairs");
  syna.save(plan_.out + "/pairs/syna-text.tsv", vocab_);
}

void Pipeline::train_lm_stage() {
  Manifest ut = load_manifest("unpaired_text");
  std::vector<std::vector<int>> sequences;
  sequences.reserve(ut.records.size());
  for (const auto& r : ut.records) sequences.push_back(vocab_.encode(r.transcript));
  LmModel lm(lm_cfg());
  Rng init_rng(derive_seed(plan_.seed, "lm.init"));
  lm.init(init_rng);
  cjt::train::TrainConfig tc = train_cfg("lm");
  cjt::train::RoundResult res = cjt::train::train_lm(lm, sequences, tc, plan_.out, "lm");
  cjt::util::ensure_dir(plan_.out + "/checkpoints");
  res.averaged.save(plan_.out + "/checkpoints/lm.ckpt");
  cjt::util::ensure_dir(plan_.out + "/logs");
  cjt::util::write_text_file(plan_.out + "/logs/train-lm.log",
                             cjt::train::render_train_log(res.log));
}

void Pipeline::cjt_round(int round) {
  std::string tag = round == 1 ? "cjt-round1" : "cjt-round2";
  PairSet psel = load_pairs(round == 1 ? "pairs/speech-psel.tsv" : "pairs/speech-psel-scored.tsv");
  PairSet syna = load_pairs("pairs/syna-text.tsv");

  cjt::train::TrainConfig tc = train_cfg(tag);
  AsrModel model(model_cfg());
  if (round == 1) {
    Rng init_rng(derive_seed(plan_.seed, "round1.init"));
    model.init(init_rng);
  } else {
    // The second round continues from the first round's averaged model.
    model.load(require_ckpt("checkpoints/round1.ckpt", "cjt-round1"));
  }
  int updates = round == 1 ? tc.updates_round1 : tc.resolved_updates_round2();

  cjt::train::Trainer trainer(model, tc, profiles_, vocab_, plan_.out);
  cjt::train::RoundResult res;
  std::string a = arm();
  if (a == "cjt") {
    cjt::train::MaskPlans plans;
    const cjt::train::MaskPlans* pp = nullptr;
    if (round == 2 && tc.mask_strategy != "none") {
      plans = cjt::train::make_mask_plans(psel, cjt::train::parse_mask_strategy(tc.mask_strategy),
                                          tc.mask_prob, tc.conf_multiplier, tc.seed);
      pp = &plans;
    }
    res = trainer.run_round(psel, syna, round, pp, updates, tag);
  } else {
    // Single-set baseline arms: the same budget spent on just one pair type,
    // masking and gradient restriction inapplicable.
    const PairSet& solo = a == "speech-only" ? psel : syna;
    res = trainer.train_supervised(solo, updates, tag);
  }
  cjt::util::ensure_dir(plan_.out + "/checkpoints");
  res.averaged.save(plan_.out + "/checkpoints/round" + std::to_string(round) + ".ckpt");
  cjt::util::ensure_dir(plan_.out + "/logs");
  cjt::util::write_text_file(plan_.out + "/logs/" + tag + ".log",
                             cjt::train::render_train_log(res.log));
}

void Pipeline::score_conf_stage() {
  PairSet psel = load_pairs("pairs/speech-psel.tsv");
  AsrModel model(model_cfg());
  model.load(require_ckpt("checkpoints/round1.ckpt", "cjt-round1"));
  cjt::pairgen::score_confidences(model, psel, profiles_, vocab_, plan_.out);
  psel.save(plan_.out + "/pairs/speech-psel-scored.tsv", vocab_);
}

void Pipeline::decode_stage() {
  std::string which = plan_.config.get_string("pipeline.decode_model", "round2");
  std::string model_stage = decode_model_stage(which);
  require_stage(model_stage, "decode");
  std::string ckpt = which == "teacher" ? "checkpoints/teacher.ckpt"
                                        : "checkpoints/" + which + ".ckpt";
  AsrModel model(model_cfg());
  model.load(require_ckpt(ckpt, model_stage));
  LmModel lm(lm_cfg());
  lm.load(require_ckpt("checkpoints/lm.ckpt", "train-lm"));

  cjt::decode::DecodeOptions opt;
  opt.beam = static_cast<int>(plan_.config.get_int("decode.beam", opt.beam));
  opt.lm_weight = plan_.config.get_double("decode.lm_weight", opt.lm_weight);
  opt.length_normalize = plan_.config.get_bool("decode.length_normalize", opt.length_normalize);
  opt.max_len_factor =
      static_cast<int>(plan_.config.get_int("decode.max_len_factor", opt.max_len_factor));

  cjt::util::ensure_dir(plan_.out + "/reports");
  for (const std::string& set : kEvalSets) {
    Manifest m = load_manifest(set);
    std::vector<std::pair<std::string, std::string>> greedy, fused;
    for (const auto& rec : m.records) {
      auto feats = cjt::synthtask::load_audio(rec.audio, rec.transcript, profiles_, vocab_,
                                              plan_.out);
      greedy.emplace_back(rec.id,
                          vocab_.decode(cjt::decode::greedy_decode(model, feats,
                                                                   opt.max_len_factor)));
      fused.emplace_back(rec.id,
                         vocab_.decode(cjt::decode::beam_decode(model, &lm, feats, opt).tokens));
    }
    cjt::util::write_text_file(plan_.out + "/reports/hyps-" + set + "-greedy.tsv",
                               cjt::decode::render_hyps(greedy));
    cjt::util::write_text_file(plan_.out + "/reports/hyps-" + set + "-fused.tsv",
                               cjt::decode::render_hyps(fused));
  }
}

void Pipeline::score_stage() {
  cjt::util::ensure_dir(plan_.out + "/reports");
  std::ostringstream summary;
  summary << "# set\tmode\tutterances\twer\n";
  for (const std::string& set : kEvalSets) {
    Manifest refs = load_manifest(set);
    for (const std::string& mode : kModes) {
      std::string hyp_path = plan_.out + "/reports/hyps-" + set + "-" + mode + ".tsv";
      if (!cjt::util::file_exists(hyp_path))
        throw DependencyError("missing " + hyp_path + "; run: cjt run --stages decode");
      auto hyps = cjt::decode::parse_hyps(cjt::util::read_text_file(hyp_path), hyp_path);
      std::map<std::string, std::string> by_id(hyps.begin(), hyps.end());

      std::vector<cjt::decode::UttScore> scores;
      for (const auto& rec : refs.records) {
        auto it = by_id.find(rec.id);
        if (it == by_id.end())
          throw DependencyError("no hypothesis for '" + rec.id + "' in " + hyp_path);
        cjt::decode::UttScore s;
        s.id = rec.id;
        s.ref = vocab_.encode(rec.transcript);
        s.hyp = vocab_.encode(it->second);
        s.result = cjt::decode::wer(s.ref, s.hyp);
        scores.push_back(std::move(s));
      }
      cjt::util::write_text_file(plan_.out + "/reports/wer-" + set + "-" + mode + ".txt",
                                 cjt::decode::render_score_report(vocab_, scores));
      cjt::decode::ScoreTotals t = cjt::decode::score_totals(scores);
      summary << set << '\t' << mode << '\t' << t.utterances << '\t' << fmt_fixed(t.wer(), 4)
              << '\n';
    }
  }
  cjt::util::write_text_file(plan_.out + "/reports/summary.tsv", summary.str());
}

void Pipeline::analyze_stage() {
  int frames = static_cast<int>(plan_.config.get_int("analysis.probe_frames", 10000));
  int bins = static_cast<int>(plan_.config.get_int("analysis.bins", 20));
  Manifest probe = load_manifest("dev-clean");

  Checkpoint reference = require_ckpt("checkpoints/teacher.ckpt", "train-teacher");
  Checkpoint round1 = require_ckpt("checkpoints/round1.ckpt", "cjt-round1");
  std::vector<std::pair<std::string, const Checkpoint*>> models = {{"round1", &round1}};
  Checkpoint round2;
  if (stage_current("cjt-round2")) {
    round2 = require_ckpt("checkpoints/round2.ckpt", "cjt-round2");
    models.emplace_back("round2", &round2);
  }
  auto rows = cjt::analysis::layer_similarity_sweep(models, reference, model_cfg(), probe, frames,
                                                    profiles_, vocab_, plan_.out);
  cjt::util::ensure_dir(plan_.out + "/reports");
  cjt::util::write_text_file(plan_.out + "/reports/pwcca.tsv",
                             cjt::analysis::render_similarity_table(rows));

  PairSet scored = load_pairs("pairs/speech-psel-scored.tsv");
  Manifest ups = load_manifest("unpaired_speech");
  cjt::analysis::ConfidenceHistogram h =
      cjt::analysis::confidence_histogram(scored, ups, vocab_, bins);
  cjt::util::write_text_file(plan_.out + "/reports/confidence-histogram.tsv",
                             cjt::analysis::render_histogram(h));
  std::ostringstream means;
  means << "# class\tcount\tmean\n"
        << "correct\t" << h.correct_total << '\t' << fmt_fixed(h.correct_mean, 6) << '\n'
        << "incorrect\t" << h.incorrect_total << '\t' << fmt_fixed(h.incorrect_mean, 6) << '\n';
  cjt::util::write_text_file(plan_.out + "/reports/confidence-means.tsv", means.str());
}

}  // namespace cjt::pipeline
