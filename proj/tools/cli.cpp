// Copyright 2026 The lsevoc Authors. All Rights Reserved.
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

#include "lsevoc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>

#include "lsevoc/diffusion.hpp"
#include "lsevoc/error.hpp"
#include "lsevoc/lse_net.hpp"
#include "lsevoc/training.hpp"
#include "lsevoc/vocos.hpp"
#include "lsevoc/wav.hpp"

namespace lsevoc::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using spectral::FeatureKind;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kUsage;
  if (dynamic_cast<const DivergenceError*>(&e)) return kDivergence;
  return kDataError;
}

namespace {

constexpr const char* kStages[] = {"lse", "vocos2d", "vocos-baseline"};

void prepare_runtime(const GlobalConfig& cfg) {
  const auto threads = cfg.integer("runtime.threads");
  if (threads > 0) torch::set_num_threads(static_cast<int>(threads));
  at::globalContext().setDeterministicAlgorithms(true, true);
}

fs::path cache_dir(const GlobalConfig& cfg, const fs::path& dataset) {
  const auto c = cfg.string("paths.cache");
  return c.empty() ? dataset / "cache" : fs::path(c);
}

fs::path runs_dir(const GlobalConfig& cfg, const std::optional<fs::path>& override_dir) {
  return override_dir ? *override_dir : fs::path(cfg.string("paths.runs"));
}

fs::path stats_path(const fs::path& dataset) { return dataset / "stats.json"; }

spectral::SpectralConfig spectral_with_stats(const GlobalConfig& cfg, const fs::path& dataset) {
  auto spec = cfg.spectral();
  if (!fs::exists(stats_path(dataset))) {
    throw DataError("no normalization statistics at " + stats_path(dataset).string() +
                    "; run `lsevoc extract` on the corpus first");
  }
  spec.norm = data::read_norm_stats(stats_path(dataset));
  return spec;
}

std::vector<data::ManifestEntry> train_entries(const fs::path& dataset) {
  const auto manifest = dataset / "manifest.jsonl";
  if (!fs::exists(manifest)) {
    throw DataError("no manifest at " + manifest.string() + "; run `lsevoc extract` on the corpus first");
  }
  auto entries = data::select_split(data::read_manifest(manifest), "train");
  if (entries.empty()) throw DataError(manifest.string() + " has no train entries");
  return entries;
}

// Sections whose values shape a stage's weights or its inputs.
std::vector<std::string> model_sections(const std::string& stage) {
  if (stage == "lse") return {"spectral", "lse"};
  if (stage == "vocos2d") return {"spectral", "vocos2d"};
  return {"spectral", "vocos_baseline"};
}

std::vector<std::string> train_sections(const std::string& stage) {
  if (stage == "lse") return {"lse_train"};
  return {"vocoder_train", "da", "discriminator"};
}

json stage_manifest(const GlobalConfig& cfg, const std::string& stage, const spectral::SpectralConfig& spec,
                    const std::vector<data::ManifestEntry>& entries) {
  json sections = json::object();
  for (const auto& s : model_sections(stage)) sections[s] = cfg.section(s);
  for (const auto& s : train_sections(stage)) sections[s] = cfg.section(s);
  return {{"config", sections},
          {"norm", data::norm_stats_to_json(spec.norm)},
          {"spectral_fingerprint", to_hex(spec.fingerprint())},
          {"corpus_fingerprint", to_hex(data::manifest_fingerprint(entries))}};
}

[[noreturn]] void refuse(const std::string& what, const std::vector<std::string>& diff) {
  std::string msg = what + " (checkpoint -> active):";
  const std::size_t shown = std::min<std::size_t>(diff.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + diff[i];
  if (diff.size() > shown) msg += "\n  ... " + std::to_string(diff.size() - shown) + " more";
  throw DataError(msg);
}

void check_matches(const training::Checkpoint& ck, const json& expected, const std::string& what,
                   const std::vector<std::string>& ignore) {
  auto stored = ck.config;
  stored.erase("stage");
  auto diff = config_diff(stored, expected, ignore);
  if (!diff.empty()) refuse(what, diff);
}

std::vector<training::LseExample> lse_examples_from_cache(const fs::path& cache,
                                                          const std::vector<data::ManifestEntry>& entries,
                                                          const spectral::SpectralConfig& spec, double seconds) {
  const auto frames = static_cast<std::int64_t>(std::llround(seconds * spec.frames_per_second));
  const auto lin_floor = spectral::normalized_floor(FeatureKind::linear, spec).view({-1, 1});
  const auto mel_floor = spectral::normalized_floor(FeatureKind::mel, spec).view({-1, 1});
  std::vector<training::LseExample> out;
  for (const auto& e : entries) {
    torch::Tensor lin, mel;
    try {
      lin = data::load_feature(cache, e.id, FeatureKind::linear, spec);
      mel = data::load_feature(cache, e.id, FeatureKind::mel, spec);
    } catch (const StaleCacheError&) {
      throw;
    } catch (const DataError& err) {
      throw DataError(std::string(err.what()) + "; run `lsevoc extract` to build the feature cache");
    }
    lin = spectral::normalize(lin, FeatureKind::linear, spec);
    mel = spectral::normalize(mel, FeatureKind::mel, spec);
    const auto t = lin.size(1);
    for (std::int64_t off = 0; off < t; off += frames) {
      const auto rest = t - off;
      if (rest >= frames) {
        out.push_back({lin.narrow(1, off, frames).clone(), mel.narrow(1, off, frames).clone()});
      } else if (2 * rest >= frames) {
        auto pad = [&](const torch::Tensor& x, const torch::Tensor& floor) {
          return torch::cat({x.narrow(1, off, rest), floor.expand({x.size(0), frames - rest})}, 1);
        };
        out.push_back({pad(lin, lin_floor), pad(mel, mel_floor)});
      }
    }
  }
  if (out.empty()) throw DataError("every training clip is shorter than half a segment");
  return out;
}

std::vector<torch::Tensor> vocoder_segments(const fs::path& dataset, const std::vector<data::ManifestEntry>& entries,
                                            const spectral::SpectralConfig& spec, double seconds) {
  std::vector<spectral::WaveformClip> clips;
  for (const auto& e : entries) clips.push_back(data::load_clip(dataset, e));
  std::vector<torch::Tensor> out;
  for (auto& s : training::segment_clips(clips, seconds, spec.sample_rate)) out.push_back(std::move(s.samples));
  return out;
}

std::uint64_t stage_salt(const std::string& stage) {
  if (stage == "lse") return 1;
  if (stage == "vocos2d") return 2;
  return 3;
}

training::Checkpoint load_stage_checkpoint(const fs::path& runs, const std::string& stage) {
  const auto dir = runs / stage / "checkpoint";
  if (!fs::exists(dir / "weights.bin")) {
    throw DataError("no " + stage + " checkpoint at " + dir.string() + "; run `lsevoc train --stage " + stage +
                    "` first");
  }
  auto ck = training::load_checkpoint(dir);
  if (ck.config.value("stage", std::string()) != (stage == "vocos-baseline" ? "vocos-baseline" : stage)) {
    throw DataError(dir.string() + " holds a '" + ck.config.value("stage", std::string("?")) +
                    "' checkpoint, expected " + stage);
  }
  return ck;
}

void check_model_config(const GlobalConfig& cfg, const training::Checkpoint& ck, const std::string& stage,
                        const fs::path& where) {
  json expected = json::object();
  for (const auto& s : model_sections(stage)) expected[s] = cfg.section(s);
  json stored = json::object();
  for (const auto& s : model_sections(stage)) {
    if (ck.config.contains("config") && ck.config["config"].contains(s)) stored[s] = ck.config["config"][s];
  }
  auto diff = config_diff(stored, expected);
  if (!diff.empty()) refuse(where.string() + " was trained with a different configuration", diff);
}

spectral::SpectralConfig checkpoint_spectral(const GlobalConfig& cfg, const training::Checkpoint& ck) {
  auto spec = cfg.spectral();
  spec.norm = data::norm_stats_from_json(ck.config.at("norm"));
  return spec;
}

torch::Tensor to_tensor(std::vector<float> v) {
  return torch::from_blob(v.data(), {static_cast<std::int64_t>(v.size())}, torch::kFloat).clone();
}

spectral::WaveformClip read_wav_at(const fs::path& path, int sample_rate) {
  auto a = wav::read(path);
  auto mono = a.mono();
  if (a.sample_rate != sample_rate) mono = data::resample(mono, a.sample_rate, sample_rate);
  return {to_tensor(std::move(mono)), sample_rate};
}

void write_wav(const fs::path& path, const spectral::WaveformClip& clip) {
  auto s = clip.samples.reshape({-1}).to(torch::kFloat).contiguous();
  std::vector<float> v(s.data_ptr<float>(), s.data_ptr<float>() + s.numel());
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  wav::write(path, v, clip.sample_rate, wav::SampleFormat::float32);
}

}  // namespace

ExtractSummary extract(const GlobalConfig& cfg, const fs::path& in_dir, const fs::path& dataset_dir,
                       bool overwrite_cache) {
  prepare_runtime(cfg);
  auto spec = cfg.spectral();
  auto res = data::ingest(in_dir, dataset_dir, cfg.ingest());
  ExtractSummary s;
  s.warnings = res.warnings;
  s.clips = static_cast<int>(res.entries.size());
  auto train = data::select_split(res.entries, "train");
  s.train = static_cast<int>(train.size());
  s.test = s.clips - s.train;
  spec.norm = data::compute_norm_stats(dataset_dir, train.empty() ? res.entries : train, spec);
  data::write_norm_stats(stats_path(dataset_dir), spec.norm);
  s.cache = data::cache_features(dataset_dir, res.entries, spec, cache_dir(cfg, dataset_dir), overwrite_cache);
  return s;
}

fs::path train(const GlobalConfig& cfg_in, const TrainRequest& req) {
  if (std::find(std::begin(kStages), std::end(kStages), req.stage) == std::end(kStages)) {
    throw UsageError("unknown stage '" + req.stage + "' (expected lse, vocos2d or vocos-baseline)");
  }
  GlobalConfig cfg = cfg_in;
  const bool is_lse = req.stage == "lse";
  if (req.steps) cfg.set(is_lse ? "lse_train.steps" : "vocoder_train.steps", *req.steps, "--steps");
  prepare_runtime(cfg);

  const auto spec = spectral_with_stats(cfg, req.dataset);
  const auto entries = train_entries(req.dataset);
  const auto run_dir = runs_dir(cfg, req.runs) / req.stage;
  const auto ckpt_dir = run_dir / "checkpoint";
  const bool have = fs::exists(ckpt_dir / "weights.bin");
  if (req.resume && !have) throw DataError("nothing to resume: no checkpoint at " + ckpt_dir.string());
  if (!req.resume && have) {
    if (!req.force) {
      throw DataError(ckpt_dir.string() + " exists; pass --resume to continue it or --force to start over");
    }
    fs::remove_all(run_dir);
  }
  fs::create_directories(run_dir);

  const auto manifest = stage_manifest(cfg, req.stage, spec, entries);
  const std::string steps_key = is_lse ? "config.lse_train.steps" : "config.vocoder_train.steps";
  const std::string every_key = is_lse ? "config.lse_train.checkpoint_every" : "config.vocoder_train.checkpoint_every";
  std::optional<training::Checkpoint> ck;
  if (req.resume) {
    ck = training::load_checkpoint(ckpt_dir);
    check_matches(*ck, manifest, "cannot resume " + ckpt_dir.string() + ": configuration or corpus changed",
                  {steps_key, every_key});
  }

  if (is_lse) {
    auto tc = cfg.lse_train();
    torch::manual_seed(mix_seed(tc.seed, stage_salt(req.stage)));
    auto examples = lse_examples_from_cache(cache_dir(cfg, req.dataset), entries, spec, tc.segment_seconds);
    training::LseTrainer trainer(cfg.lse(), spec, tc, std::move(examples), manifest);
    if (ck) trainer.restore(*ck);
    trainer.run(run_dir);
  } else {
    auto tc = cfg.vocoder_train();
    torch::manual_seed(mix_seed(tc.seed, stage_salt(req.stage)));
    auto kind = training::vocoder_kind_from_string(req.stage);
    auto segments = vocoder_segments(req.dataset, entries, spec, tc.segment_seconds);
    training::VocoderTrainer trainer(kind, kind == training::VocoderKind::vocos2d ? cfg.vocos2d() : vocos::Vocos2DConfig{},
                                     kind == training::VocoderKind::baseline ? cfg.baseline() : vocos::BaselineVocosConfig{},
                                     spec, tc, std::move(segments), manifest);
    if (ck) trainer.restore(*ck);
    trainer.run(run_dir);
  }
  return run_dir;
}

spectral::WaveformClip synth(const GlobalConfig& cfg_in, const SynthRequest& req) {
  GlobalConfig cfg = cfg_in;
  if (req.seed) cfg.set("synth.seed", static_cast<std::int64_t>(*req.seed), "--seed");
  if (req.steps) cfg.set("diffusion.sample_steps", *req.steps, "--steps");
  prepare_runtime(cfg);
  if (req.source != "wav" && req.source != "cache") {
    throw UsageError("unknown mel source '" + req.source + "' (expected wav or cache)");
  }
  if (req.dump_linear && !req.use_lse) throw UsageError("--dump-linear requires --use-lse");
  const auto runs = runs_dir(cfg, req.runs);

  const std::string vocoder_stage = req.use_lse ? "vocos2d" : "vocos-baseline";
  auto voc_ck = load_stage_checkpoint(runs, vocoder_stage);
  check_model_config(cfg, voc_ck, vocoder_stage, runs / vocoder_stage / "checkpoint");
  auto spec = checkpoint_spectral(cfg, voc_ck);

  std::optional<training::Checkpoint> lse_ck;
  if (req.use_lse) {
    lse_ck = load_stage_checkpoint(runs, "lse");
    check_model_config(cfg, *lse_ck, "lse", runs / "lse" / "checkpoint");
    auto diff = config_diff(voc_ck.config.at("norm"), lse_ck->config.at("norm"));
    if (!diff.empty()) refuse("lse and vocos2d checkpoints were trained on different statistics", diff);
  }

  torch::NoGradGuard g;
  spectral::FeatureExtractor fx(spec);
  torch::Tensor mel;
  if (req.source == "wav") {
    mel = fx.log_mel(read_wav_at(req.input, spec.sample_rate).samples);
  } else {
    if (req.dataset.empty()) throw UsageError("--source cache requires --data");
    mel = data::load_feature(cache_dir(cfg, req.dataset), req.input, FeatureKind::mel, spec);
  }
  mel = spectral::normalize(mel, FeatureKind::mel, spec);
  const auto frames = mel.size(1);

  spectral::WaveformClip out;
  if (req.use_lse) {
    auto lcfg = cfg.lse();
    lse::LseNet net(lcfg);
    training::load_module(*net, *lse_ck, "ema");
    net->eval();
    const auto tp = (frames + lcfg.patch_t - 1) / lcfg.patch_t * lcfg.patch_t;
    auto cond = mel;
    if (tp > frames) {
      auto floor = spectral::normalized_floor(FeatureKind::mel, spec).view({-1, 1});
      cond = torch::cat({mel, floor.expand({mel.size(0), tp - frames})}, 1);
    }
    const auto schedule = diffusion::NoiseSchedule::linear();
    const std::vector<std::uint64_t> seeds{static_cast<std::uint64_t>(cfg.integer("synth.seed"))};
    auto x = diffusion::dpmpp_2m_sample(lse::as_eps_model(net), cond.unsqueeze(0), lcfg.n_linear,
                                        cfg.sampler(schedule), schedule, seeds);
    spectral::LinearSpec lin{x[0].narrow(1, 0, frames).contiguous(), true};
    if (req.dump_linear) {
      if (req.dump_linear->has_parent_path()) fs::create_directories(req.dump_linear->parent_path());
      data::write_feature(*req.dump_linear, spectral::denormalize(lin, spec).values.to(torch::kFloat),
                          spec.fingerprint());
    }
    vocos::Vocos2D gen(cfg.vocos2d(), spec);
    training::load_module(*gen, voc_ck, "ema");
    gen->eval();
    out = gen->synthesize(lin);
  } else {
    vocos::BaselineVocos gen(cfg.baseline(), spec);
    training::load_module(*gen, voc_ck, "ema");
    gen->eval();
    out = gen->synthesize(spectral::MelSpec{mel, true});
  }
  out.samples = out.samples.reshape({-1});
  write_wav(req.out, out);
  return out;
}

eval::ScoreTable evaluate(const GlobalConfig& cfg, const fs::path& methods_root, const fs::path& out_dir) {
  prepare_runtime(cfg);
  auto spec = cfg.spectral();
  eval::RegimeRunConfig rc;
  try {
    rc = cfg.regime_run();
  } catch (const UsageError& e) {
    throw ConfigError(std::string("eval.regimes: ") + e.what());
  }
  std::vector<std::string> notices;
  auto audio = eval::load_method_audio(methods_root, eval::standard_methods(), notices);
  if (audio.find(eval::kMethodGt) == audio.end()) {
    throw DataError("no gt audio under " + (methods_root / eval::kMethodGt).string());
  }
  fs::create_directories(out_dir);
  auto table = eval::evaluate_regimes(audio, rc, spec, out_dir);
  table.notices.insert(table.notices.begin(), notices.begin(), notices.end());
  eval::write_score_csv(out_dir / "scores.csv", table);
  eval::render_score_figure(out_dir / "scores.png", table);
  return table;
}

int render(const GlobalConfig& cfg, const fs::path& wav_dir, const fs::path& png_dir) {
  auto spec = cfg.spectral();
  std::vector<fs::path> files;
  if (fs::is_directory(wav_dir)) {
    for (const auto& e : fs::directory_iterator(wav_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
    }
  }
  if (files.empty()) throw DataError("no WAV files in " + wav_dir.string());
  std::sort(files.begin(), files.end());
  fs::create_directories(png_dir);
  for (const auto& f : files) {
    eval::render_spectrogram(read_wav_at(f, spec.sample_rate), png_dir / (f.stem().string() + ".png"), spec);
  }
  return static_cast<int>(files.size());
}

std::vector<fs::path> toy_corpus(const GlobalConfig& cfg, const fs::path& out) {
  return data::write_toy_corpus(out, cfg.toy());
}

// ---------------------------------------------------------------------------
// Command line

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lsevoc: linear-spectrogram estimation and 2D vocoding"};
  app.name("lsevoc");
  app.require_subcommand(1);
  app.fallthrough();
  app.footer("\n" + keys_help() +
             "\nExit codes: 0 success, 1 usage, 2 data or config error, 3 numeric divergence.");

  std::string config_file;
  std::vector<std::string> sets;
  app.add_option("--config", config_file, "JSON config file ({section: {key: value}})");
  app.add_option("--set", sets, "override one key, section.key=value (repeatable)")->take_all();

  auto* x = app.add_subcommand("extract", "ingest a corpus, compute statistics and cache features");
  std::string x_in, x_out;
  bool x_overwrite = false;
  x->add_option("--in", x_in, "directory of source audio")->required();
  x->add_option("--out", x_out, "dataset directory")->required();
  x->add_flag("--overwrite-cache", x_overwrite, "rebuild cached features");

  auto* t = app.add_subcommand("train", "train one stage");
  TrainRequest treq;
  std::string t_data, t_runs;
  t->add_option("--stage", treq.stage, "lse, vocos2d or vocos-baseline")
      ->required()
      ->check(CLI::IsMember({"lse", "vocos2d", "vocos-baseline"}));
  t->add_option("--data", t_data, "dataset directory written by extract")->required();
  t->add_option("--runs", t_runs, "run root (default paths.runs)");
  std::int64_t t_steps = -1;
  t->add_option("--steps", t_steps, "total steps (overrides <stage>_train.steps)")->check(CLI::NonNegativeNumber);
  t->add_flag("--resume", treq.resume, "continue the stage's checkpoint");
  t->add_flag("--force", treq.force, "discard an existing checkpoint");

  auto* s = app.add_subcommand("synth", "mel spectrogram to waveform");
  SynthRequest sreq;
  std::string s_data, s_runs, s_out, s_dump;
  std::int64_t s_seed = -1;
  int s_steps = -1;
  s->add_option("--input", sreq.input, "WAV path, or manifest id with --source cache")->required();
  s->add_option("--source", sreq.source, "wav or cache")->check(CLI::IsMember({"wav", "cache"}));
  s->add_option("--data", s_data, "dataset directory for --source cache");
  s->add_option("--out", s_out, "output WAV")->required();
  s->add_option("--runs", s_runs, "run root (default paths.runs)");
  s->add_flag("--use-lse", sreq.use_lse, "mel -> LSE -> Vocos2D instead of the baseline vocoder");
  s->add_option("--seed", s_seed, "sampling seed (overrides synth.seed)")->check(CLI::NonNegativeNumber);
  s->add_option("--steps", s_steps, "sampling steps (overrides diffusion.sample_steps)")->check(CLI::PositiveNumber);
  s->add_option("--dump-linear", s_dump, "also write the estimated linear spectrogram (.lsf)");

  auto* e = app.add_subcommand("eval", "train the regime classifiers and score held-out audio");
  std::string e_methods, e_out;
  std::vector<std::string> e_regimes;
  e->add_option("--methods", e_methods, "root holding <method>/{train,test}/*.wav")->required();
  e->add_option("--out", e_out, "output directory")->required();
  e->add_option("--regimes", e_regimes, "subset of mdctgan-only, vocos-only, both, lse-vocos2d-only");

  auto* r = app.add_subcommand("render", "spectrogram PNG for every WAV in a directory");
  std::string r_in, r_out;
  r->add_option("--in", r_in, "WAV directory")->required();
  r->add_option("--out", r_out, "PNG directory")->required();

  auto* toy = app.add_subcommand("toy-corpus", "write the synthetic sweep corpus");
  std::string toy_out;
  toy->add_option("--out", toy_out, "output directory")->required();

  auto* c = app.add_subcommand("config", "print the resolved configuration");

  for (auto* sub : {x, t, s, e, r, toy, c}) sub->footer("\nRun `lsevoc --help` for every configuration key.");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    GlobalConfig cfg;
    if (!config_file.empty()) cfg.merge_file(config_file);
    for (const auto& a : sets) cfg.set(a);

    if (*x) {
      auto sum = extract(cfg, x_in, x_out, x_overwrite);
      for (const auto& w : sum.warnings) err << "warning: " << w << "\n";
      out << "extracted " << sum.clips << " clips (" << sum.train << " train, " << sum.test
          << " test); cache: " << sum.cache.written << " written, " << sum.cache.skipped << " up to date\n";
    } else if (*t) {
      treq.dataset = t_data;
      if (!t_runs.empty()) treq.runs = fs::path(t_runs);
      if (t_steps >= 0) treq.steps = t_steps;
      auto dir = train(cfg, treq);
      out << "trained " << treq.stage << "; checkpoint " << (dir / "checkpoint").string() << ", log "
          << (dir / "loss.csv").string() << "\n";
    } else if (*s) {
      sreq.out = s_out;
      if (!s_data.empty()) sreq.dataset = s_data;
      if (!s_runs.empty()) sreq.runs = fs::path(s_runs);
      if (s_seed >= 0) sreq.seed = static_cast<std::uint64_t>(s_seed);
      if (s_steps > 0) sreq.steps = s_steps;
      if (!s_dump.empty()) sreq.dump_linear = fs::path(s_dump);
      auto clip = synth(cfg, sreq);
      out << "wrote " << sreq.out.string() << " (" << clip.size() << " samples)\n";
    } else if (*e) {
      if (!e_regimes.empty()) {
        for (const auto& name : e_regimes) eval::regime_by_name(name);
        cfg.set("eval.regimes", json(e_regimes), "--regimes");
      }
      auto table = evaluate(cfg, e_methods, e_out);
      for (const auto& n : table.notices) err << "notice: " << n << "\n";
      out << "wrote " << table.rows.size() << " score rows to " << (fs::path(e_out) / "scores.csv").string()
          << "\n";
    } else if (*r) {
      const int n = render(cfg, r_in, r_out);
      out << "rendered " << n << " spectrograms to " << r_out << "\n";
    } else if (*toy) {
      auto files = toy_corpus(cfg, toy_out);
      out << "wrote " << files.size() << " clips to " << toy_out << "\n";
    } else if (*c) {
      out << cfg.tree().dump(2) << "\n";
    }
    return kOk;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex);
  }
}

}  // namespace lsevoc::cli
