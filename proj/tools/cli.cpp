// Copyright 2026 The steplab Authors.
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

#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <map>
#include <memory>
#include <set>
#include <string_view>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "steplab/checkpoint.hpp"
#include "steplab/corpus.hpp"
#include "steplab/error.hpp"
#include "steplab/log.hpp"
#include "steplab/parallel.hpp"

namespace steplab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidConfig, message);
}

void CheckKeys(const json& j, std::initializer_list<std::string_view> allowed,
               std::string_view where) {
  if (!j.is_object()) Invalid(std::string(where) + " must be a JSON object");
  const std::set<std::string_view> keys(allowed);
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) Invalid("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void Get(const json& j, const char* key, T& dst) {
  const auto it = j.find(key);
  if (it != j.end() && !it->is_null()) dst = it->get<T>();
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void ReadSynth(const json& j, PipelineConfig& cfg) {
  CheckKeys(j,
            {"seed", "num_videos", "heldout_videos", "num_segments", "steps_per_video",
             "num_tasks", "steps_per_task", "min_span", "max_span", "narrations_per_step",
             "jitter_sec", "irrelevant_ratio", "noise_sigma", "dim"},
            "synth");
  SynthConfig& s = cfg.synth;
  Get(j, "seed", s.seed);
  Get(j, "num_videos", s.num_videos);
  Get(j, "heldout_videos", cfg.synth_heldout_videos);
  Get(j, "num_segments", s.num_segments);
  Get(j, "steps_per_video", s.steps_per_video);
  Get(j, "num_tasks", s.num_tasks);
  Get(j, "steps_per_task", s.steps_per_task);
  Get(j, "min_span", s.min_span);
  Get(j, "max_span", s.max_span);
  Get(j, "narrations_per_step", s.narrations_per_step);
  Get(j, "jitter_sec", s.timestamp_jitter_sec);
  Get(j, "irrelevant_ratio", s.irrelevant_narration_ratio);
  if (j.contains("noise_sigma")) s.SetNoise(j.at("noise_sigma").get<double>());
  if (j.contains("dim")) {
    const auto dim = j.at("dim").get<std::size_t>();
    for (auto& [name, enc] : s.encoders) enc.dim = dim;
  }
}

void ReadPathways(const json& j, PathwayConfig& p) {
  CheckKeys(j,
            {"tau", "harmonize", "enabled", "narration_text_encoder", "long_text_encoder",
             "long_video_encoder", "short_text_encoder", "short_video_encoder"},
            "pathways");
  Get(j, "tau", p.tau);
  Get(j, "harmonize", p.harmonize);
  if (j.contains("enabled")) {
    p.enabled.clear();
    for (const auto& name : j.at("enabled")) p.enabled.push_back(ParsePathway(name.get<std::string>()));
  }
  Get(j, "narration_text_encoder", p.narration_text_encoder);
  Get(j, "long_text_encoder", p.long_text_encoder);
  Get(j, "long_video_encoder", p.long_video_encoder);
  Get(j, "short_text_encoder", p.short_text_encoder);
  Get(j, "short_video_encoder", p.short_video_encoder);
}

void ReadTrain(const json& j, TrainConfig& t) {
  CheckKeys(j,
            {"eta", "lr", "weight_decay", "warmup_iters", "epochs", "batch_size", "seed",
             "beta1", "beta2", "epsilon", "checkpoint_every"},
            "train");
  Get(j, "eta", t.eta);
  Get(j, "lr", t.lr_peak);
  Get(j, "weight_decay", t.weight_decay);
  Get(j, "warmup_iters", t.warmup_iters);
  Get(j, "epochs", t.epochs);
  Get(j, "batch_size", t.batch_size);
  Get(j, "seed", t.seed);
  Get(j, "beta1", t.beta1);
  Get(j, "beta2", t.beta2);
  Get(j, "epsilon", t.epsilon);
  Get(j, "checkpoint_every", t.checkpoint_every);
}

void ReadLlm(const json& j, const fs::path& base, PipelineConfig& cfg) {
  CheckKeys(j, {"endpoint", "model", "timeout_sec", "max_retries", "chunk_size", "steps_file"},
            "llm");
  Get(j, "endpoint", cfg.llm.endpoint_url);
  Get(j, "model", cfg.llm.model_name);
  Get(j, "timeout_sec", cfg.llm.timeout_sec);
  Get(j, "max_retries", cfg.llm.max_retries);
  Get(j, "chunk_size", cfg.prompt.chunk_size);
  if (j.contains("steps_file")) cfg.steps_file = Resolve(base, j.at("steps_file").get<std::string>());
}

// Flag values; unset flags leave the config untouched.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> output;
  std::optional<std::string> corpus;
  std::optional<std::string> eval_corpus;
  std::optional<std::string> labels;
  std::optional<std::string> checkpoint;
  std::optional<std::string> narrations;
  std::optional<std::string> steps_file;
  std::optional<std::string> endpoint;
  std::optional<std::string> metric;
  std::optional<std::string> dataset_id;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma;
  std::optional<std::size_t> window;
  std::optional<std::size_t> jobs;
};

void ApplyFlags(const Flags& f, PipelineConfig& cfg) {
  if (f.output) cfg.output = *f.output;
  if (f.corpus) cfg.corpus = fs::path(*f.corpus);
  if (f.eval_corpus) cfg.eval_corpus = fs::path(*f.eval_corpus);
  if (f.steps_file) cfg.steps_file = fs::path(*f.steps_file);
  if (f.endpoint) cfg.llm.endpoint_url = *f.endpoint;
  if (f.metric) cfg.metric = ParseMetric(*f.metric);
  if (f.dataset_id) cfg.dataset_id = *f.dataset_id;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.batch_size) cfg.train.batch_size = *f.batch_size;
  if (f.lr) cfg.train.lr_peak = *f.lr;
  if (f.eta) cfg.train.eta = *f.eta;
  if (f.seed) {
    cfg.synth.seed = *f.seed;
    cfg.train.seed = *f.seed;
  }
  if (f.gamma) cfg.gamma = *f.gamma;
  if (f.window) cfg.window = *f.window;
  if (f.jobs) {
    cfg.jobs = *f.jobs;
    cfg.train.jobs = *f.jobs;
  }
}

std::string Json(const ordered_json& j) { return j.dump(); }

void WriteJson(const ordered_json& j, const fs::path& path) {
  WriteFileBytes(path, j.dump(2) + "\n");
}

Corpus LoadInputCorpus(const std::optional<fs::path>& manifest, const PipelineConfig& cfg,
                       std::string_view what) {
  if (!manifest) {
    throw Error(ErrorCode::kMissingInput, std::string(what) + " manifest not given (--corpus)");
  }
  return LoadCorpus(*manifest, {cfg.max_segments});
}

// Input widths come from the corpus; the rest of the architecture from config.
ModelConfig ResolveModelConfig(const PipelineConfig& cfg, const Corpus& corpus) {
  ModelConfig mc = cfg.model;
  if (corpus.entries.empty()) Invalid("corpus has no videos");
  const CorpusEntry& first = corpus.entries.front();
  const auto seg = first.segment_embeddings.find(cfg.features.segment_encoder);
  const auto step = first.step_embeddings.find(cfg.features.step_encoder);
  if (seg == first.segment_embeddings.end() || step == first.step_embeddings.end()) {
    throw Error(ErrorCode::kMissingInput,
                "corpus lacks model features '" + cfg.features.segment_encoder + "'/'" +
                    cfg.features.step_encoder + "'");
  }
  mc.video_input_dim = seg->second.cols();
  mc.step_input_dim = step->second.cols();
  mc.Validate();
  return mc;
}

struct SynthPaths {
  fs::path train;
  std::optional<fs::path> heldout;
};

SynthPaths RunSynth(const PipelineConfig& cfg, const fs::path& out_dir) {
  SynthConfig sc = cfg.synth;
  sc.num_videos += cfg.synth_heldout_videos;
  SynthCorpus synth = GenerateSynthetic(sc, cfg.jobs);
  // Videos share step prototypes across the whole draw; the last ones are held out.
  Corpus train;
  Corpus heldout;
  for (std::size_t i = 0; i < synth.corpus.entries.size(); ++i) {
    auto& dst = i < cfg.synth.num_videos ? train : heldout;
    dst.entries.push_back(std::move(synth.corpus.entries[i]));
  }
  SynthPaths paths;
  paths.train = SaveCorpus(train, out_dir / "corpus");
  if (!heldout.entries.empty()) paths.heldout = SaveCorpus(heldout, out_dir / "heldout");
  return paths;
}

std::unique_ptr<LlmClient> MakeClient(const PipelineConfig& cfg) {
  if (cfg.llm.endpoint_url.empty()) return nullptr;
  return std::make_unique<HttpLlmClient>(cfg.llm);
}

std::size_t RunExtract(const PipelineConfig& cfg, const Corpus& corpus, const fs::path& dir) {
  auto client = MakeClient(cfg);
  ExtractOptions opts;
  opts.prompt = cfg.prompt;
  opts.client = client.get();
  opts.max_retries = cfg.llm.max_retries;
  opts.fallback_file = cfg.steps_file;
  opts.jobs = cfg.jobs;
  std::size_t total = 0;
  for (const auto& entry : corpus.entries) {
    const auto steps = ExtractSteps(entry.narrations, opts);
    WriteTrack(steps, dir / (entry.video_id + ".jsonl"));
    total += steps.size();
  }
  return total;
}

std::vector<VideoAlignment> RunAlign(const PipelineConfig& cfg, const Corpus& corpus,
                                     const std::optional<fs::path>& dump_dir) {
  std::vector<VideoAlignment> out(corpus.entries.size());
  ParallelFor(corpus.entries.size(), cfg.jobs,
              [&](std::size_t i) { out[i] = AlignVideo(corpus.entries[i], cfg.pathways); });
  if (dump_dir) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::string& vid = corpus.entries[i].video_id;
      for (const auto& score : out[i].pathways) DumpScoreMatrix(score, vid, *dump_dir);
      DumpScoreMatrix(out[i].fused, vid, *dump_dir);
    }
  }
  return out;
}

ordered_json StatsJson(const LabelStats& s) {
  ordered_json j;
  j["rows"] = s.rows;
  j["kept"] = s.kept;
  j["kept_ratio"] = s.kept_ratio;
  j["mean_window_width"] = s.mean_window_width;
  return j;
}

struct PseudolabelResult {
  LabelMap labels;
  ordered_json stats;
};

PseudolabelResult RunPseudolabel(const PipelineConfig& cfg, const Corpus& corpus,
                                 const fs::path& label_dir,
                                 const std::optional<fs::path>& score_dir) {
  const auto aligned = RunAlign(cfg, corpus, score_dir);
  PseudolabelResult result;
  ordered_json per_video = ordered_json::object();
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t positives = 0;
  LabelQuality quality;
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const CorpusEntry& entry = corpus.entries[i];
    LabelMatrix labels = BuildSvLabels(aligned[i].fused, cfg.gamma, cfg.window);
    WriteLabels(labels, entry.video_id, label_dir / (entry.video_id + ".json"));
    const LabelStats s = ComputeLabelStats(labels);
    per_video[entry.video_id] = StatsJson(s);
    rows += s.rows;
    kept += s.kept;
    for (double v : labels.m.data()) positives += v > 0.5;
    quality += ScoreLabels(labels, GroundTruthLabels(entry));
    result.labels.emplace(entry.video_id, std::move(labels));
  }
  ordered_json& j = result.stats;
  j["gamma"] = cfg.gamma;
  j["window"] = cfg.window;
  j["videos"] = corpus.entries.size();
  j["rows"] = rows;
  j["kept"] = kept;
  j["kept_ratio"] = rows == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(rows);
  j["mean_window_width"] =
      kept == 0 ? 0.0 : static_cast<double>(positives) / static_cast<double>(kept);
  if (quality.steps > 0) {
    ordered_json q;
    q["precision"] = quality.Precision();
    q["recall"] = quality.Recall();
    q["f1"] = quality.F1();
    j["quality"] = std::move(q);
  }
  j["per_video"] = std::move(per_video);
  WriteJson(j, label_dir / "stats.json");
  return result;
}

LabelMap ReadLabelDir(const Corpus& corpus, const fs::path& dir) {
  LabelMap labels;
  for (const auto& entry : corpus.entries) {
    const fs::path path = dir / (entry.video_id + ".json");
    if (!fs::exists(path)) {
      log::Warn("no labels for " + entry.video_id);
      continue;
    }
    LabelFile file = ReadLabels(path, entry.num_segments);
    if (file.video_id != entry.video_id) {
      throw Error(ErrorCode::kInvalidArgument,
                  path.string() + ": video_id '" + file.video_id + "' does not match");
    }
    labels.emplace(entry.video_id, std::move(file.labels));
  }
  return labels;
}

TrainResult RunTrain(const PipelineConfig& cfg, const Corpus& corpus, const LabelMap& labels,
                     const fs::path& out_dir) {
  const ModelConfig mc = ResolveModelConfig(cfg, corpus);
  CheckpointHook hook;
  if (cfg.train.checkpoint_every > 0) {
    hook = [&](std::size_t iter, const ModelParams& params) {
      char name[32];
      std::snprintf(name, sizeof(name), "iter_%06zu", iter);
      SaveCheckpoint(params, cfg.train.seed, iter, out_dir / "checkpoints" / name);
    };
  }
  TrainResult result = Train(corpus, labels, mc, cfg.train, cfg.features, hook);
  SaveCheckpoint(result.params, cfg.train.seed, result.total_iters, out_dir / "checkpoint");
  WriteLossCurve(result.curve, out_dir / "loss.csv");
  return result;
}

EvalReport RunEval(const PipelineConfig& cfg, const ModelParams& params, const Corpus& corpus,
                   const fs::path& report_path) {
  EvalReport report =
      EvaluateCorpus(params, corpus, cfg.dataset_id, cfg.metric, cfg.features, cfg.jobs);
  WriteReport(report, report_path);
  return report;
}

ordered_json Summary(std::string_view stage) {
  ordered_json j;
  j["stage"] = stage;
  return j;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingInput:
      return kExitMissingInput;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kMagicMismatch:
    case ErrorCode::kTruncated:
    case ErrorCode::kShapeOverflow:
    case ErrorCode::kParse:
    case ErrorCode::kInfeasiblePacking:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

void PrintError(std::ostream& err, std::string_view code, std::string_view message) {
  ordered_json j;
  j["code"] = code;
  j["message"] = message;
  err << "error: " << j.dump() << "\n";
}

}  // namespace

void PipelineConfig::Validate() const {
  if (jobs == 0) Invalid("jobs must be >= 1");
  if (max_segments == 0) Invalid("max_segments must be >= 1");
  if (!std::isfinite(gamma)) Invalid("gamma must be finite");
  if (!corpus) synth.Validate();
  pathways.Validate();
  model.Validate();
  train.Validate();
  if (prompt.chunk_size == 0) Invalid("llm chunk_size must be >= 1");
  for (const auto& p : {corpus, eval_corpus, steps_file}) {
    if (p && !fs::exists(*p)) {
      throw Error(ErrorCode::kMissingInput, p->string() + ": no such file");
    }
  }
}

PipelineConfig LoadPipelineConfig(const fs::path& path) {
  PipelineConfig cfg;
  const fs::path base = path.parent_path();
  try {
    const json j = json::parse(ReadFileBytes(path));
    CheckKeys(j,
              {"corpus", "eval_corpus", "output", "synth", "pathways", "gamma", "window", "model",
               "train", "features", "dataset_id", "metric", "llm", "jobs", "max_segments"},
              "config");
    if (j.contains("corpus")) cfg.corpus = Resolve(base, j.at("corpus").get<std::string>());
    if (j.contains("eval_corpus")) {
      cfg.eval_corpus = Resolve(base, j.at("eval_corpus").get<std::string>());
    }
    if (j.contains("output")) cfg.output = Resolve(base, j.at("output").get<std::string>());
    if (j.contains("synth")) ReadSynth(j.at("synth"), cfg);
    if (j.contains("pathways")) ReadPathways(j.at("pathways"), cfg.pathways);
    Get(j, "gamma", cfg.gamma);
    Get(j, "window", cfg.window);
    if (j.contains("model")) {
      CheckKeys(j.at("model"),
                {"video_input_dim", "step_input_dim", "hidden_dim", "layers", "heads",
                 "max_positions", "use_text_pe"},
                "model");
      cfg.model = ModelConfigFromJson(j.at("model"));
    }
    if (j.contains("train")) ReadTrain(j.at("train"), cfg.train);
    if (j.contains("features")) {
      CheckKeys(j.at("features"), {"segment", "step"}, "features");
      Get(j.at("features"), "segment", cfg.features.segment_encoder);
      Get(j.at("features"), "step", cfg.features.step_encoder);
    }
    Get(j, "dataset_id", cfg.dataset_id);
    if (j.contains("metric")) cfg.metric = ParseMetric(j.at("metric").get<std::string>());
    if (j.contains("llm")) ReadLlm(j.at("llm"), base, cfg);
    Get(j, "jobs", cfg.jobs);
    Get(j, "max_segments", cfg.max_segments);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return cfg;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  log::InitFromEnv();
  CLI::App app{"Multi-pathway step grounding toolkit", "steplab"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--output", f.output, "output directory or file");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  auto corpus_opt = [&](CLI::App* sub) {
    sub->add_option("--corpus", f.corpus, "corpus manifest");
  };
  auto label_opts = [&](CLI::App* sub) {
    sub->add_option("--gamma", f.gamma, "confidence threshold");
    sub->add_option("--window", f.window, "half width of the label window");
  };
  auto train_opts = [&](CLI::App* sub) {
    sub->add_option("--epochs", f.epochs, "training epochs")->check(CLI::PositiveNumber);
    sub->add_option("--batch-size", f.batch_size, "videos per batch")->check(CLI::PositiveNumber);
    sub->add_option("--lr", f.lr, "peak learning rate");
    sub->add_option("--eta", f.eta, "MIL-NCE temperature");
  };
  auto eval_opts = [&](CLI::App* sub) {
    sub->add_option("--metric", f.metric, "R@1 or Avg.R@1");
    sub->add_option("--dataset-id", f.dataset_id, "dataset name written to the report");
  };
  auto llm_opts = [&](CLI::App* sub) {
    sub->add_option("--steps-file", f.steps_file, "precomputed step track (JSONL)");
    sub->add_option("--endpoint", f.endpoint, "LLM endpoint URL");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  common(synth);

  CLI::App* extract = app.add_subcommand("extract-steps", "summarize narrations into steps");
  common(extract);
  corpus_opt(extract);
  llm_opts(extract);
  extract->add_option("--narrations", f.narrations, "single narration track (JSONL)");

  CLI::App* align = app.add_subcommand("align", "write pathway score matrices");
  common(align);
  corpus_opt(align);

  CLI::App* pseudo = app.add_subcommand("pseudolabel", "write step pseudo-labels and stats");
  common(pseudo);
  corpus_opt(pseudo);
  label_opts(pseudo);

  CLI::App* train = app.add_subcommand("train", "train the grounding model");
  common(train);
  corpus_opt(train);
  train_opts(train);
  train->add_option("--labels", f.labels, "directory of label files")->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  common(eval);
  corpus_opt(eval);
  eval_opts(eval);
  eval->add_option("--checkpoint", f.checkpoint, "checkpoint directory")->required();

  CLI::App* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
  common(pipeline);
  corpus_opt(pipeline);
  label_opts(pipeline);
  train_opts(pipeline);
  eval_opts(pipeline);
  llm_opts(pipeline);
  pipeline->add_option("--eval-corpus", f.eval_corpus, "held-out corpus manifest");

  if (!args.empty() && !args.front().starts_with("-") &&
      app.get_subcommand_no_throw(args.front()) == nullptr) {
    PrintError(err, "Usage", "unknown subcommand '" + args.front() + "'");
    err << app.help();
    return kExitUsage;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    PrintError(err, "Usage", e.what());
    err << app.help();
    return kExitUsage;
  }

  try {
    PipelineConfig cfg = f.config ? LoadPipelineConfig(*f.config) : PipelineConfig{};
    ApplyFlags(f, cfg);
    cfg.Validate();
    ordered_json summary;

    if (synth->parsed()) {
      const SynthPaths paths = RunSynth(cfg, cfg.output);
      summary = Summary("synth");
      summary["corpus"] = paths.train.string();
      if (paths.heldout) summary["heldout"] = paths.heldout->string();
    } else if (extract->parsed()) {
      summary = Summary("extract-steps");
      if (f.narrations) {
        Corpus single;
        CorpusEntry entry;
        entry.narrations = ReadNarrationTrack(*f.narrations);
        entry.narrations.Validate();
        single.entries.push_back(std::move(entry));
        auto client = MakeClient(cfg);
        ExtractOptions opts;
        opts.prompt = cfg.prompt;
        opts.client = client.get();
        opts.max_retries = cfg.llm.max_retries;
        opts.fallback_file = cfg.steps_file;
        opts.jobs = cfg.jobs;
        const auto steps = ExtractSteps(single.entries.front().narrations, opts);
        WriteTrack(steps, cfg.output);
        summary["steps"] = steps.size();
      } else {
        const Corpus corpus = LoadInputCorpus(cfg.corpus, cfg, "corpus");
        summary["steps"] = RunExtract(cfg, corpus, cfg.output);
      }
    } else if (align->parsed()) {
      const Corpus corpus = LoadInputCorpus(cfg.corpus, cfg, "corpus");
      RunAlign(cfg, corpus, cfg.output);
      summary = Summary("align");
      summary["videos"] = corpus.entries.size();
    } else if (pseudo->parsed()) {
      const Corpus corpus = LoadInputCorpus(cfg.corpus, cfg, "corpus");
      const auto result = RunPseudolabel(cfg, corpus, cfg.output, std::nullopt);
      summary = Summary("pseudolabel");
      summary["gamma"] = cfg.gamma;
      summary["window"] = cfg.window;
      summary["kept_ratio"] = result.stats["kept_ratio"];
    } else if (train->parsed()) {
      const Corpus corpus = LoadInputCorpus(cfg.corpus, cfg, "corpus");
      if (!fs::is_directory(*f.labels)) {
        throw Error(ErrorCode::kMissingInput, *f.labels + ": no such directory");
      }
      const LabelMap labels = ReadLabelDir(corpus, *f.labels);
      const TrainResult result = RunTrain(cfg, corpus, labels, cfg.output);
      summary = Summary("train");
      summary["iterations"] = result.total_iters;
      summary["final_loss"] = result.curve.empty() ? 0.0 : result.curve.back().loss;
    } else if (eval->parsed()) {
      const Corpus corpus = LoadInputCorpus(cfg.corpus, cfg, "corpus");
      if (!fs::exists(fs::path(*f.checkpoint) / "checkpoint.json")) {
        throw Error(ErrorCode::kMissingInput, *f.checkpoint + ": no checkpoint.json");
      }
      const Checkpoint ckpt = LoadCheckpoint(*f.checkpoint);
      fs::path report_path = cfg.output;
      if (fs::is_directory(report_path)) report_path /= "report.json";
      const EvalReport report = RunEval(cfg, ckpt.params, corpus, report_path);
      summary = Summary("eval");
      summary["metric"] = MetricName(report.metric);
      summary["value"] = report.value;
    } else if (pipeline->parsed()) {
      const fs::path outdir = cfg.output;
      fs::path manifest;
      std::optional<fs::path> eval_manifest = cfg.eval_corpus;
      if (cfg.corpus) {
        manifest = *cfg.corpus;
      } else {
        const SynthPaths paths = RunSynth(cfg, outdir);
        manifest = paths.train;
        if (!eval_manifest) eval_manifest = paths.heldout;
      }
      const Corpus corpus = LoadCorpus(manifest, {cfg.max_segments});
      summary = Summary("pipeline");
      if (!cfg.llm.endpoint_url.empty() || cfg.steps_file) {
        summary["extracted_steps"] = RunExtract(cfg, corpus, outdir / "steps");
      }
      const auto labels = RunPseudolabel(cfg, corpus, outdir / "labels", outdir / "scores");
      const TrainResult trained = RunTrain(cfg, corpus, labels.labels, outdir);
      const Corpus eval_corpus =
          eval_manifest ? LoadCorpus(*eval_manifest, {cfg.max_segments}) : corpus;
      const EvalReport report = RunEval(cfg, trained.params, eval_corpus, outdir / "report.json");
      summary["kept_ratio"] = labels.stats["kept_ratio"];
      summary["iterations"] = trained.total_iters;
      summary["metric"] = MetricName(report.metric);
      summary["value"] = report.value;
      summary["report"] = (outdir / "report.json").string();
    }
    out << Json(summary) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    PrintError(err, ErrorCodeName(e.code()), e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    PrintError(err, "Internal", e.what());
    return kExitRuntime;
  }
}

}  // namespace steplab::cli
