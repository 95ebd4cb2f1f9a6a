// tools/main.cpp
//
// Copyright 2026 The cosgauss Authors
//
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
//
// Single entry point for all workflows: synth, pretrain-cpc,
// pretrain-supervised, train, eval-folds, extract, filters-dump.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cosgauss/checkpoint.hpp"
#include "cosgauss/classifier.hpp"
#include "cosgauss/config.hpp"
#include "cosgauss/cpc.hpp"
#include "cosgauss/folds.hpp"
#include "cosgauss/synth.hpp"

namespace {

using namespace cosgauss;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--config", opts.config_path,
                  "config file (flat `key = value` lines, `#` comments)");
  sub->add_option("--set", opts.sets,
                  "inline config override, e.g. --set train.epochs=5")
      ->take_all();
}

// Resolves file + overrides + defaults, validates, and logs the full config
// so any run is reproducible from its log alone.
RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) {
    std::ifstream f(opts.config_path);
    if (!f) fail("cannot open config file " + opts.config_path);
    std::string line;
    while (std::getline(f, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      apply_config_line(cfg, line);
    }
  }
  for (const auto& s : opts.sets) apply_config_line(cfg, s);
  validate_config(cfg);
  std::cout << "# resolved config\n" << dump_config(cfg) << "# end config\n";
  return cfg;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail("cannot open for writing: " + path);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) fail("write failed: " + path);
}

std::string train_history_csv(const TrainHistory& h) {
  std::string out = "epoch,train_loss,val_auc\n";
  char buf[96];
  for (const auto& e : h) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", e.epoch, e.train_loss,
                  e.val_auc);
    out += buf;
  }
  return out;
}

std::string cpc_history_csv(const CpcHistory& h) {
  std::string out = "step,loss,contrastive_accuracy\n";
  char buf[96];
  for (const auto& e : h) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", e.step, e.loss,
                  e.accuracy);
    out += buf;
  }
  return out;
}

std::string matrix_csv(const Matrix& m) {
  std::string out;
  char buf[40];
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.9g", m(r, c));
      if (c) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

struct InitOpts {
  std::string init_from;
  bool freeze_filters = false;
  bool fine_tune = false;
  bool init_relevance = false;
};

void add_init_opts(CLI::App* sub, InitOpts& opts) {
  sub->add_option("--init-from", opts.init_from,
                  "checkpoint whose filters initialize the model");
  auto* fr = sub->add_flag("--freeze-filters", opts.freeze_filters,
                           "keep transferred filters fixed during training");
  auto* ft = sub->add_flag("--fine-tune", opts.fine_tune,
                           "update transferred filters during training (default)");
  fr->excludes(ft);
  sub->add_flag("--init-relevance", opts.init_relevance,
                "also transfer the relevance net when the checkpoint has one");
}

BackendModel build_model(const RunConfig& cfg, const InitOpts& init) {
  Rng rng(model_init_seed(cfg.seed));
  BackendModel model = make_backend(backend_setup(cfg), rng);
  if (!init.init_from.empty()) {
    Checkpoint ckpt = load_checkpoint(init.init_from);
    transfer_filters(ckpt, model, init.init_relevance);
  }
  return model;
}

int run_synth(const CommonOpts& common, const std::string& out_dir) {
  RunConfig cfg = resolve_config(common);
  SynthSpec spec = synth_spec(cfg);
  Manifest m = synth_corpus(spec, out_dir);
  if (cfg.synth_folds >= 2) write_fold_manifests(spec, out_dir, cfg.synth_folds);
  std::cout << "wrote " << m.size() << " files + manifest.csv to " << out_dir
            << "\n";
  return 0;
}

int run_train(const CommonOpts& common, const InitOpts& init,
              const std::string& train_path, const std::string& val_path,
              const std::string& out_dir, bool emit_filterbank) {
  RunConfig cfg = resolve_config(common);
  std::filesystem::create_directories(out_dir);
  Manifest train = read_manifest(train_path);
  Manifest val = val_path.empty() ? Manifest{} : read_manifest(val_path);
  BackendModel model = build_model(cfg, init);
  TrainConfig tc = train_config(cfg);
  tc.freeze_filters = init.freeze_filters;
  TrainHistory history = train_supervised(train, val, tc, model);
  auto out = std::filesystem::path(out_dir);
  write_text((out / "history.csv").string(), train_history_csv(history));
  save_checkpoint(checkpoint_from_backend(model, "cosgauss train"),
                  (out / "model.json").string());
  if (emit_filterbank)
    save_checkpoint(
        checkpoint_from_filterbank(model.fb, &model.relev,
                                   "cosgauss supervised pretraining"),
        (out / "filterbank.json").string());
  const auto& last = history.back();
  std::cout << "epochs run: " << history.size()
            << "  final train_loss: " << last.train_loss
            << "  final val_auc: " << last.val_auc << "\n";
  return 0;
}

int run_pretrain_cpc(const CommonOpts& common, const std::string& manifest_path,
                     const std::string& out_dir) {
  RunConfig cfg = resolve_config(common);
  std::filesystem::create_directories(out_dir);
  Manifest manifest = read_manifest(manifest_path);
  Rng rng(model_init_seed(cfg.seed));
  CpcModel model = make_cpc(cpc_setup(cfg), cpc_config(cfg), rng);
  CpcHistory history = pretrain_cpc(manifest, cpc_config(cfg), model);
  auto out = std::filesystem::path(out_dir);
  write_text((out / "history.csv").string(), cpc_history_csv(history));
  save_checkpoint(checkpoint_from_cpc(model, "cosgauss pretrain-cpc"),
                  (out / "model.json").string());
  save_checkpoint(checkpoint_from_filterbank(model.fb, nullptr,
                                             "cosgauss cpc pretraining"),
                  (out / "filterbank.json").string());
  const auto& last = history.back();
  std::cout << "steps run: " << history.size() << "  final loss: " << last.loss
            << "  final contrastive_accuracy: " << last.accuracy << "\n";
  return 0;
}

int run_eval_folds(const CommonOpts& common, const InitOpts& init,
                   const std::string& folds_path, const std::string& out_dir) {
  RunConfig cfg = resolve_config(common);
  std::filesystem::create_directories(out_dir);
  std::vector<FoldSpec> folds = read_folds_file(folds_path);
  TrainConfig tc = train_config(cfg);
  tc.freeze_filters = init.freeze_filters;
  Checkpoint ckpt;
  const Checkpoint* ckpt_ptr = nullptr;
  if (!init.init_from.empty()) {
    ckpt = load_checkpoint(init.init_from);
    ckpt_ptr = &ckpt;
  }
  FoldReport report = run_folds(folds, backend_setup(cfg), tc, ckpt_ptr,
                                init.init_relevance);
  std::string csv = fold_report_csv(report);
  write_text((std::filesystem::path(out_dir) / "report.csv").string(), csv);
  std::cout << csv;
  return 0;
}

int run_extract(const CommonOpts& common, const std::string& in_path,
                const std::string& ckpt_path, const std::string& out_dir) {
  RunConfig cfg = resolve_config(common);
  std::filesystem::create_directories(out_dir);
  BackendModel model;
  if (!ckpt_path.empty()) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    if (ckpt.kind == "backend") {
      model = backend_from_checkpoint(ckpt);
    } else {
      InitOpts init;
      init.init_from = ckpt_path;
      init.init_relevance = true;
      model = build_model(cfg, init);
    }
  } else {
    model = build_model(cfg, InitOpts{});
  }
  Waveform w = resample_linear(read_wav(in_path), model.sample_rate);
  FrameSequence frames = frame_signal(w, model.frame_len, model.hop);
  LearnedSpectrogram spec = fb_forward(frames, model.fb);
  Matrix M = relevance_forward(spec.values, model.relev);
  Matrix J = apply_mask(spec.values, M);
  auto out = std::filesystem::path(out_dir);
  write_text((out / "I.csv").string(), matrix_csv(spec.values));
  write_text((out / "M.csv").string(), matrix_csv(M));
  write_text((out / "J.csv").string(), matrix_csv(J));
  std::cout << "wrote I.csv, M.csv, J.csv (" << spec.values.rows << " x "
            << spec.values.cols << ") to " << out_dir << "\n";
  return 0;
}

int run_filters_dump(const CommonOpts& common, const std::string& ckpt_path,
                     const std::string& out_path,
                     const std::string& kernels_path) {
  RunConfig cfg = resolve_config(common);
  FilterbankParams fb;
  if (!ckpt_path.empty()) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    fb.mu = ckpt.array("fb.mu").values;
    fb.kernel_len = static_cast<int>(ckpt.cfg("L"));
    fb.mu_min = ckpt.cfg("mu_min");
    fb.mu_max = ckpt.cfg("mu_max");
    fb.eps = ckpt.cfg("eps");
  } else {
    fb.mu = init_mel_centers(cfg.num_filters, cfg.f_min, cfg.f_max,
                             cfg.sample_rate);
    fb.kernel_len = cfg.kernel_len;
    fb.mu_min = cfg.mu_min;
    fb.mu_max = cfg.mu_max;
    fb.eps = cfg.fb_eps;
    fb.clamp_mu();
  }
  fb.validate();
  Matrix kernels = build_kernels(fb);
  const std::size_t n_fft = 8192;
  std::string csv = "filter,mu,mu_hz,bw3db,bw3db_hz\n";
  char buf[160];
  for (std::size_t i = 0; i < fb.num_filters(); ++i) {
    Vec resp = frequency_response(kernels.row_span(i), n_fft);
    double bw = bandwidth_3db(resp, n_fft);
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.9g,%.17g,%.9g\n", i, fb.mu[i],
                  fb.mu[i] * cfg.sample_rate, bw, bw * cfg.sample_rate);
    csv += buf;
  }
  write_text(out_path, csv);
  if (!kernels_path.empty()) write_text(kernels_path, matrix_csv(kernels));
  std::cout << "wrote " << fb.num_filters() << " filters to " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cosgauss: learnable cosine-modulated Gaussian filterbank "
               "front-end for binary audio classification"};
  app.require_subcommand(1);

  CommonOpts c_synth, c_cpc, c_presup, c_train, c_folds, c_extract, c_dump;
  InitOpts i_train, i_folds;
  std::string synth_out, cpc_manifest, cpc_out;
  std::string presup_train, presup_val, presup_out;
  std::string train_train, train_val, train_out;
  std::string folds_file, folds_out;
  std::string extract_in, extract_ckpt, extract_out;
  std::string dump_ckpt, dump_out, dump_kernels;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth, c_synth);
  synth->add_option("--out", synth_out, "output directory")->required();

  auto* cpc = app.add_subcommand("pretrain-cpc",
                                 "self-supervised filter pretraining");
  add_common(cpc, c_cpc);
  cpc->add_option("--manifest", cpc_manifest, "file list (labels ignored)")
      ->required();
  cpc->add_option("--out", cpc_out, "output directory")->required();

  auto* presup = app.add_subcommand(
      "pretrain-supervised",
      "supervised pretraining; also emits a filterbank checkpoint");
  add_common(presup, c_presup);
  presup->add_option("--train", presup_train, "training manifest")->required();
  presup->add_option("--val", presup_val, "validation manifest");
  presup->add_option("--out", presup_out, "output directory")->required();

  auto* train = app.add_subcommand("train", "supervised training");
  add_common(train, c_train);
  add_init_opts(train, i_train);
  train->add_option("--train", train_train, "training manifest")->required();
  train->add_option("--val", train_val, "validation manifest");
  train->add_option("--out", train_out, "output directory")->required();

  auto* folds = app.add_subcommand("eval-folds",
                                   "k-fold train/evaluate harness");
  add_common(folds, c_folds);
  add_init_opts(folds, i_folds);
  folds->add_option("--folds", folds_file, "folds file: id,train,val lines")
      ->required();
  folds->add_option("--out", folds_out, "output directory")->required();

  auto* extract = app.add_subcommand(
      "extract", "dump I, M, J matrices for one file as CSV");
  add_common(extract, c_extract);
  extract->add_option("--in", extract_in, "input WAV")->required();
  extract->add_option("--ckpt", extract_ckpt,
                      "checkpoint to take the model from");
  extract->add_option("--out", extract_out, "output directory")->required();

  auto* dump = app.add_subcommand(
      "filters-dump", "per-filter center frequencies and bandwidths as CSV");
  add_common(dump, c_dump);
  dump->add_option("--ckpt", dump_ckpt, "checkpoint to take filters from");
  dump->add_option("--out", dump_out, "output CSV path")->required();
  dump->add_option("--kernels", dump_kernels,
                   "also dump kernel rows to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return run_synth(c_synth, synth_out);
    if (cpc->parsed()) return run_pretrain_cpc(c_cpc, cpc_manifest, cpc_out);
    if (presup->parsed())
      return run_train(c_presup, InitOpts{}, presup_train, presup_val,
                       presup_out, /*emit_filterbank=*/true);
    if (train->parsed())
      return run_train(c_train, i_train, train_train, train_val, train_out,
                       /*emit_filterbank=*/false);
    if (folds->parsed())
      return run_eval_folds(c_folds, i_folds, folds_file, folds_out);
    if (extract->parsed())
      return run_extract(c_extract, extract_in, extract_ckpt, extract_out);
    if (dump->parsed())
      return run_filters_dump(c_dump, dump_ckpt, dump_out, dump_kernels);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
