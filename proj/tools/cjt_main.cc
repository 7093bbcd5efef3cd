// tools/cjt_main.cc

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

// Experiment driver. Stage subcommands run a single pipeline stage against
// --out; `run` drives a stage list (default: the whole pipeline) with
// completion markers so finished work is skipped; `compare` renders a WER
// table over several runs' summaries; `inspect` describes an artifact file.
//
// Exit codes: 0 success, 2 configuration error, 3 missing dependency,
// 4 numerical fault during training.

#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "model/checkpoint.h"
#include "pairgen/pair_set.h"
#include "pipeline/compare.h"
#include "pipeline/pipeline.h"
#include "pipeline/presets.h"
#include "synthtask/manifest.h"
#include "synthtask/vocab.h"
#include "util/error.h"
#include "util/hash.h"
#include "util/io.h"
#include "util/kv_config.h"
#include "util/strings.h"

namespace {

using cjt::pipeline::ExperimentPlan;
using cjt::util::KvConfig;

struct GlobalOpts {
  std::string config_path;
  std::string preset;
  std::string out;
  int64_t seed = 1;
  bool seed_given = false;
  bool out_given = false;
  bool force = false;
  std::vector<std::string> sets;
};

KvConfig assemble_config(const GlobalOpts& g) {
  KvConfig cfg;
  if (!g.preset.empty()) cfg = cjt::pipeline::preset_config(g.preset);
  if (!g.config_path.empty()) cfg.merge_from(KvConfig::parse_file(g.config_path));
  for (const std::string& s : g.sets) cfg.apply_override(s);
  if (g.seed_given) cfg.set_int("pipeline.seed", g.seed);
  if (g.out_given) cfg.set("pipeline.out", g.out);
  return cfg;
}

ExperimentPlan make_plan(const GlobalOpts& g, std::vector<std::string> stages) {
  ExperimentPlan plan;
  plan.config = assemble_config(g);
  plan.seed = static_cast<uint64_t>(plan.config.get_int("pipeline.seed", 1));
  plan.out = plan.config.get_string("pipeline.out", "");
  plan.force = g.force;
  plan.stages = std::move(stages);
  return plan;
}

int run_stages(const GlobalOpts& g, std::vector<std::string> stages) {
  cjt::pipeline::Pipeline p(make_plan(g, std::move(stages)));
  p.run();
  return 0;
}

int do_compare(const std::vector<std::string>& paths, const std::string& labels_csv) {
  std::vector<std::string> labels;
  if (!labels_csv.empty()) {
    labels = cjt::util::split(labels_csv, ',');
    if (labels.size() != paths.size())
      throw cjt::ConfigError("--labels must name every summary exactly once");
  }
  std::vector<cjt::pipeline::RunSummary> runs;
  for (size_t i = 0; i < paths.size(); ++i) {
    std::string label = labels.empty() ? paths[i] : labels[i];
    runs.push_back(
        cjt::pipeline::parse_summary(cjt::util::read_text_file(paths[i]), label, paths[i]));
  }
  std::cout << cjt::pipeline::render_compare(runs);
  return 0;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int do_inspect(const std::string& path) {
  const cjt::synthtask::Vocab& vocab = cjt::synthtask::Vocab::standard();
  if (ends_with(path, ".ckpt")) {
    cjt::model::Checkpoint ck = cjt::model::Checkpoint::load(path);
    size_t numel = 0;
    for (const auto& [name, t] : ck.params) numel += t.numel();
    std::cout << "checkpoint\t" << path << "\nfingerprint\t" << cjt::util::hash_hex(ck.fingerprint)
              << "\nupdates\t" << ck.updates << "\nround_tag\t" << ck.round_tag << "\nparams\t"
              << ck.params.size() << "\nweights\t" << numel << "\n";
    return 0;
  }
  if (path.find("manifests/") != std::string::npos && ends_with(path, ".tsv")) {
    cjt::synthtask::Manifest m = cjt::synthtask::Manifest::load(path);
    std::map<std::string, int> by_prov;
    int sealed = 0;
    for (const auto& r : m.records) {
      ++by_prov[r.provenance];
      sealed += !r.sealed.empty();
    }
    std::cout << "manifest\t" << path << "\nrecords\t" << m.records.size() << "\nsealed\t"
              << sealed << "\n";
    for (const auto& [prov, n] : by_prov) std::cout << "provenance\t" << prov << "\t" << n << "\n";
    return 0;
  }
  if (path.find("pairs/") != std::string::npos && ends_with(path, ".tsv")) {
    cjt::pairgen::PairSet p = cjt::pairgen::PairSet::load(path, vocab);
    int scored = 0;
    long long tokens = 0;
    for (const auto& r : p.records) {
      scored += !r.confidences.empty();
      tokens += static_cast<long long>(r.target.size());
    }
    std::cout << "pair_set\t" << path << "\nrecords\t" << p.records.size() << "\nscored\t"
              << scored << "\ntokens\t" << tokens << "\n";
    return 0;
  }
  // Fall back to the raw text with its size, which covers configs, logs,
  // reports, and markers.
  std::string text = cjt::util::read_text_file(path);
  auto lines = cjt::util::split(text, '\n');
  size_t n = lines.size();
  while (n > 0 && lines[n - 1].empty()) --n;
  std::cout << "text\t" << path << "\nbytes\t" << text.size() << "\nlines\t" << n << "\n";
  if (n > 0) std::cout << "first\t" << lines[0] << "\nlast\t" << lines[n - 1] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"complementary joint training pipeline"};
  app.require_subcommand(1);

  GlobalOpts g;
  auto* seed_opt = app.add_option("--seed", g.seed, "run seed (config key pipeline.seed)");
  auto* out_opt = app.add_option("--out", g.out, "output directory (config key pipeline.out)");
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--preset", g.preset, "tiny | small | medium | paper-defaults");
  app.add_flag("--force", g.force, "rerun requested stages even when marked done");
  app.add_option("--set", g.sets, "override, e.g. --set train.mask_prob=0.3")
      ->take_all();

  auto* c_gen = app.add_subcommand("gen-data", "sample the corpus and materialize audio");
  auto* c_train = app.add_subcommand("train", "run one training stage");
  std::string train_stage;
  c_train->add_option("--stage", train_stage, "teacher | lm | round1 | round2")->required();
  auto* c_psl = app.add_subcommand("pseudolabel", "transcribe unpaired speech with the teacher");
  auto* c_syn = app.add_subcommand("synthesize", "render SynA-text pairs from unpaired text");
  auto* c_dec = app.add_subcommand("decode", "decode the eval sets (greedy and fused)");
  auto* c_score = app.add_subcommand("score", "score hypotheses against references");
  auto* c_ana = app.add_subcommand("analyze", "similarity curves and confidence histograms");
  auto* c_run = app.add_subcommand("run", "run a stage list with completion markers");
  std::string stages_csv;
  c_run->add_option("--stages", stages_csv, "comma-separated subset, in any order");
  auto* c_cmp = app.add_subcommand("compare", "tabulate WER across run summaries");
  std::vector<std::string> cmp_paths;
  std::string cmp_labels;
  c_cmp->add_option("summaries", cmp_paths, "reports/summary.tsv files")->required();
  c_cmp->add_option("--labels", cmp_labels, "comma-separated row labels");
  auto* c_ins = app.add_subcommand("inspect", "describe an artifact file");
  std::string ins_path;
  c_ins->add_option("path", ins_path, "artifact to describe")->required();

  // Global flags may follow the subcommand: let unmatched subcommand
  // arguments climb back up to the app.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
    g.seed_given = seed_opt->count() > 0;
    g.out_given = out_opt->count() > 0;

    if (c_gen->parsed()) return run_stages(g, {"gen-data"});
    if (c_train->parsed()) {
      static const std::map<std::string, std::string> stage_of = {
          {"teacher", "train-teacher"},
          {"lm", "train-lm"},
          {"round1", "cjt-round1"},
          {"round2", "cjt-round2"}};
      auto it = stage_of.find(train_stage);
      if (it == stage_of.end())
        throw cjt::ConfigError("--stage must be teacher, lm, round1, or round2");
      return run_stages(g, {it->second});
    }
    if (c_psl->parsed()) return run_stages(g, {"pseudolabel"});
    if (c_syn->parsed()) return run_stages(g, {"synthesize"});
    if (c_dec->parsed()) return run_stages(g, {"decode"});
    if (c_score->parsed()) return run_stages(g, {"score"});
    if (c_ana->parsed()) return run_stages(g, {"analyze"});
    if (c_run->parsed()) {
      std::vector<std::string> stages;
      if (!stages_csv.empty()) stages = cjt::util::split(stages_csv, ',');
      return run_stages(g, std::move(stages));
    }
    if (c_cmp->parsed()) return do_compare(cmp_paths, cmp_labels);
    if (c_ins->parsed()) return do_inspect(ins_path);
    throw cjt::ConfigError("no subcommand given");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const cjt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cjt::DependencyError& e) {
    std::cerr << "dependency error: " << e.what() << "\n";
    return 3;
  } catch (const cjt::NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
