#include "ecgbench/cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecgbench/benchgen/benchgen.hpp"
#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"
#include "ecgbench/core/render.hpp"
#include "ecgbench/core/rng.hpp"
#include "ecgbench/core/scenarios.hpp"
#include "ecgbench/harness/harness.hpp"
#include "ecgbench/pipeline/analyze.hpp"

namespace ecgbench::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Config {
  Catalog catalog;
  DiagramSet diagrams;
  Templates templates;
};

std::unique_ptr<Config> load_config(const std::string& dir_flag) {
  const fs::path dir = dir_flag.empty() ? default_config_dir() : fs::path(dir_flag);
  auto cfg = std::make_unique<Config>();
  cfg->catalog = load_catalog(dir / "catalog.json");
  cfg->diagrams = load_diagrams(dir / "diagrams.json", cfg->catalog);
  cfg->templates = load_templates(dir / "templates.json");
  return cfg;
}

std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw IoError(p.string() + " does not exist");
}

// Runs fn(i) for i in [0, n) on `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < std::min(jobs, n); ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
}

struct Failure {
  std::string item;
  std::string error;
};

ojson failures_json(const std::vector<Failure>& failures) {
  auto a = ojson::array();
  for (const auto& f : failures) a.push_back({{"item", f.item}, {"error", f.error}});
  return a;
}

void report_failures(const std::vector<Failure>& failures) {
  for (const auto& f : failures) std::cerr << "error: " << f.item << ": " << f.error << "\n";
}

void write_manifest(const fs::path& out, const ojson& manifest) {
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// synth

SyntheticSpec spec_from_json(const std::string& text) {
  SyntheticSpec s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.id = j.value("id", s.id);
    s.sampling_rate = j.value("sampling_rate", s.sampling_rate);
    s.duration_s = j.value("duration_s", s.duration_s);
    s.heart_rate = j.value("heart_rate", s.heart_rate);
    s.pr_ms = j.value("pr_ms", s.pr_ms);
    s.p_dur_ms = j.value("p_dur_ms", s.p_dur_ms);
    s.qrs_ms = j.value("qrs_ms", s.qrs_ms);
    s.qt_ms = j.value("qt_ms", s.qt_ms);
    s.t_dur_ms = j.value("t_dur_ms", s.t_dur_ms);
    s.p_amp = j.value("p_amp", s.p_amp);
    s.r_amp = j.value("r_amp", s.r_amp);
    s.t_amp = j.value("t_amp", s.t_amp);
    s.axis_deg = j.value("axis_deg", s.axis_deg);
    s.horizontal_deg = j.value("horizontal_deg", s.horizontal_deg);
    s.st_shift_mv = j.value("st_shift_mv", s.st_shift_mv);
    s.pr_increment_ms = j.value("pr_increment_ms", s.pr_increment_ms);
    s.first_qrs_ms = j.value("first_qrs_ms", s.first_qrs_ms);
    s.rr_jitter = j.value("rr_jitter", s.rr_jitter);
    s.noise_mv = j.value("noise_mv", s.noise_mv);
    if (j.contains("atrial_rate_bpm")) s.atrial_rate_bpm = j["atrial_rate_bpm"].get<double>();
    s.dropped_qrs_schedule = j.value("dropped_qrs_schedule", std::vector<int>{});
    for (const auto& e : j.value("ectopic_schedule", nlohmann::json::array())) {
      const auto kind = e.at("kind").get<std::string>();
      if (kind != "PAC" && kind != "PVC") throw SpecError("ectopic kind must be PAC or PVC");
      s.ectopic_schedule.push_back({e.at("beat").get<int>(), kind == "PAC"
                                                               ? EctopicKind::AtrialPremature
                                                               : EctopicKind::VentricularPremature});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("spec file: ") + e.what());
  }
  return s;
}

struct SynthJob {
  std::string id;
  std::string scenario;
  std::string diagnosis;
  std::string path_id;
  SyntheticSpec spec;
  MapOptions map;
};

int cmd_synth(const std::string& spec_file, std::vector<std::string> names, std::size_t count,
              std::uint64_t seed, const std::string& format, const fs::path& out, std::size_t jobs,
              const std::string& config_dir) {
  if (format != "bin" && format != "csv") throw ConfigError("--format must be bin or csv");
  fs::create_directories(out);
  std::vector<SynthJob> work;
  if (!spec_file.empty()) {
    require_exists(spec_file);
    const auto base = spec_from_json(read_file(spec_file));
    if (count == 0) count = 1;
    for (std::size_t i = 0; i < count; ++i) {
      SynthJob job;
      job.spec = base;
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_%04zu", i);
      job.id = base.id + suffix;
      job.spec.id = job.id;
      job.spec.seed = derive_seed(seed, job.id);
      job.map.seed = job.spec.seed;
      work.push_back(std::move(job));
    }
  } else {
    if (names.empty() || (names.size() == 1 && names[0] == "all")) names = scenario_names();
    if (count == 0) count = names.size();
    for (std::size_t i = 0; i < count; ++i) {
      const auto& name = names[i % names.size()];
      auto sc = make_scenario(name, derive_seed(seed, name + "#" + std::to_string(i)));
      work.push_back({sc.spec.id, sc.name, sc.diagnosis, sc.path_id, sc.spec, sc.map});
    }
  }

  const auto cfg = load_config(config_dir);
  std::vector<ojson> entries(work.size());
  std::vector<std::optional<Failure>> errors(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    const auto& job = work[i];
    try {
      const auto res = synthesize(job.spec);
      const fs::path record_path = out / (job.id + "." + format);
      write_record(res.record, record_path);
      write_probability_map(stand_in_map(res, job.map), res.record, probmap_sidecar(record_path));
      write_file(annotations_sidecar(record_path), format_annotations(truth_delineation(res.truth)));
      ojson e;
      e["id"] = job.id;
      e["record"] = record_path.filename().string();
      e["probmap"] = probmap_sidecar(record_path).filename().string();
      e["annotations"] = annotations_sidecar(record_path).filename().string();
      if (!job.scenario.empty()) {
        e["scenario"] = job.scenario;
        e["diagnosis"] = job.diagnosis;
        e["path_id"] = job.path_id;
        e["polarity"] =
            std::string(leaf_name(replay_path(cfg->diagrams.at(job.diagnosis), job.path_id).leaf));
      }
      entries[i] = std::move(e);
    } catch (const Error& e) {
      errors[i] = Failure{job.id, e.what()};
    }
  });

  std::vector<Failure> failures;
  ojson records = ojson::array();
  ojson labels = ojson::object();
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (errors[i]) {
      failures.push_back(*errors[i]);
      continue;
    }
    if (entries[i].contains("diagnosis")) {
      labels[work[i].id][work[i].diagnosis] = entries[i]["polarity"] == "POSITIVE";
    }
    records.push_back(std::move(entries[i]));
  }
  if (!labels.empty()) write_file(out / "labels.json", labels.dump(2) + "\n");
  ojson manifest;
  manifest["command"] = "synth";
  manifest["seed"] = seed;
  manifest["format"] = format;
  manifest["count"] = records.size();
  manifest["records"] = std::move(records);
  manifest["failures"] = failures_json(failures);
  write_manifest(out, manifest);
  report_failures(failures);
  std::cout << "synthesized " << (work.size() - failures.size()) << " records into " << out.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

bool is_record_file(const fs::path& p) {
  const auto name = p.filename().string();
  auto ends_with = [&](const std::string& s) {
    return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with(".probmap.bin")) return false;
  return p.extension() == ".bin" || p.extension() == ".csv";
}

std::vector<fs::path> collect_records(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    require_exists(in);
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_regular_file() && is_record_file(e.path())) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(in);
    }
  }
  return out;
}

int cmd_analyze(const std::vector<std::string>& inputs, const fs::path& out, std::size_t jobs,
                const std::string& config_dir) {
  const auto cfg = load_config(config_dir);
  const auto records = collect_records(inputs);
  fs::create_directories(out);
  std::vector<std::optional<Failure>> errors(records.size());
  std::vector<ojson> entries(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    try {
      const auto res = analyze_file(records[i], cfg->catalog, cfg->diagrams);
      const fs::path target = out / (records[i].stem().string() + ".analysis.json");
      write_file(target, analysis_to_json(res));
      auto positives = ojson::array();
      for (const auto& d : res.diagnoses) {
        if (d.decision == Leaf::Positive) positives.push_back(d.diagnosis_id);
      }
      entries[i] = {{"record", records[i].string()},
                    {"analysis", target.filename().string()},
                    {"positive", std::move(positives)}};
    } catch (const Error& e) {
      errors[i] = Failure{records[i].string(), e.what()};
    }
  });
  std::vector<Failure> failures;
  ojson done = ojson::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (errors[i]) failures.push_back(*errors[i]);
    else done.push_back(std::move(entries[i]));
  }
  ojson manifest;
  manifest["command"] = "analyze";
  manifest["analyzed"] = done.size();
  manifest["results"] = std::move(done);
  manifest["failures"] = failures_json(failures);
  write_manifest(out, manifest);
  report_failures(failures);
  std::cout << "analyzed " << (records.size() - failures.size()) << " of " << records.size()
            << " records\n";
  return 0;
}

// ---------------------------------------------------------------------------
// generate

LabelFilter read_labels(const fs::path& path) {
  require_exists(path);
  LabelFilter out;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    for (const auto& [record, dx] : j.items()) {
      for (const auto& [id, positive] : dx.items()) out[record][id] = positive.get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return out;
}

int cmd_generate(const fs::path& analyzed, std::uint64_t seed, std::size_t target,
                 const std::vector<std::string>& diagnoses, const std::string& labels_path,
                 const fs::path& out, std::size_t jobs, const std::string& config_dir) {
  require_exists(analyzed);
  const auto cfg = load_config(config_dir);
  for (const auto& d : diagnoses) {
    if (!cfg->diagrams.find(d)) throw ConfigError("unknown diagnosis '" + d + "'");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(analyzed)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 14 &&
        name.compare(name.size() - 14, 14, ".analysis.json") == 0) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<AnalysisResult> analyses(files.size());
  std::vector<std::optional<Failure>> load_errors(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    try {
      analyses[i] = read_analysis(files[i], cfg->diagrams);
    } catch (const Error& e) {
      load_errors[i] = Failure{files[i].string(), e.what()};
    }
  });
  std::vector<Failure> failures;
  std::vector<AnalysisResult> usable;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (load_errors[i]) failures.push_back(*load_errors[i]);
    else usable.push_back(std::move(analyses[i]));
  }

  LabelFilter labels;
  if (!labels_path.empty()) labels = read_labels(labels_path);
  SamplingPlan plan{target, diagnoses};
  const auto sample = stratified_sample(candidates_from(usable), cfg->diagrams, plan, seed,
                                        labels_path.empty() ? nullptr : &labels);

  const CaseContext ctx{cfg->catalog, cfg->diagrams, cfg->templates};
  std::vector<std::optional<BenchmarkCase>> built(sample.selected.size());
  std::vector<std::optional<Failure>> build_errors(sample.selected.size());
  parallel_for(sample.selected.size(), jobs, [&](std::size_t i) {
    const auto& cand = sample.selected[i];
    const auto& analysis = usable[cand.source];
    try {
      built[i] = build_case(analysis, analysis.diagnosis(cand.diagnosis_id), ctx, seed);
    } catch (const Error& e) {
      build_errors[i] = Failure{cand.record_id + ":" + cand.diagnosis_id, e.what()};
    }
  });
  std::vector<BenchmarkCase> cases;
  for (std::size_t i = 0; i < built.size(); ++i) {
    if (build_errors[i]) failures.push_back(*build_errors[i]);
    else cases.push_back(std::move(*built[i]));
  }

  fs::create_directories(out);
  write_cases(cases, out / "cases.jsonl");
  const auto stats = dataset_stats(cases);
  write_file(out / "stats.json", stats_to_json(stats, sample));
  write_file(out / "path_table.txt", format_path_table(sample));
  ojson manifest;
  manifest["command"] = "generate";
  manifest["seed"] = seed;
  manifest["target"] = target;
  manifest["analyses"] = usable.size();
  manifest["cases"] = cases.size();
  manifest["outputs"] = {"cases.jsonl", "stats.json", "path_table.txt"};
  manifest["failures"] = failures_json(failures);
  write_manifest(out, manifest);
  report_failures(failures);
  std::cout << "generated " << cases.size() << " cases (" << stats.positive_cases << " positive, "
            << stats.negative_cases << " negative, " << stats.qa_pairs << " QA pairs)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string cases;
  std::string mock;
  ModelEndpoint endpoint;
  std::string judge_url;
  std::string judge_path = "/judge";
  std::string system_prompt_file;
  bool image = false;
  bool fresh = false;
  double rate = 0.0;
};

int cmd_evaluate(EvaluateArgs a, const fs::path& out, std::size_t jobs, const std::string& config_dir) {
  require_exists(a.cases);
  const auto cfg = load_config(config_dir);
  const auto cases = read_cases(a.cases);

  std::unique_ptr<ChatModel> model;
  if (!a.mock.empty()) {
    model = make_mock(a.mock);
  } else {
    apply_endpoint_env(a.endpoint);
    if (a.rate > 0) a.endpoint.min_interval_s = 1.0 / a.rate;
    model = std::make_unique<HttpChatModel>(a.endpoint);
  }
  Verifier verifier;
  if (!a.judge_url.empty()) {
    JudgeEndpoint j;
    j.base_url = a.judge_url;
    j.path = a.judge_path;
    if (const char* key = std::getenv("ECGBENCH_JUDGE_KEY")) j.auth_value = std::string("Bearer ") + key;
    verifier = Verifier(j);
  }

  SessionOptions session;
  session.templates = &cfg->templates;
  if (!a.system_prompt_file.empty()) {
    require_exists(a.system_prompt_file);
    session.system_prompt = read_file(a.system_prompt_file);
  } else {
    session.system_prompt = default_system_prompt();
  }
  session.attach_image = a.image;

  fs::create_directories(out);
  EvaluationOptions eo;
  eo.jobs = jobs;
  eo.transcripts_path = out / "transcripts.jsonl";
  eo.resume = !a.fresh;
  const auto transcripts = evaluate_cases(cases, *model, verifier, session, eo);

  std::vector<Failure> failures;
  for (const auto& t : transcripts) {
    if (t.failed) failures.push_back({t.case_id, t.error});
  }
  const auto report = compute_metrics(transcripts);
  write_file(out / "metrics.json", metrics_to_json(report));
  const auto table = format_metrics_table(report);
  write_file(out / "metrics.txt", table);
  ojson manifest;
  manifest["command"] = "evaluate";
  manifest["model"] = model->describe();
  manifest["verifier"] = std::string(verifier_kind_name(verifier.kind()));
  manifest["cases"] = cases.size();
  manifest["outputs"] = {"transcripts.jsonl", "metrics.json", "metrics.txt"};
  manifest["failures"] = failures_json(failures);
  write_manifest(out, manifest);
  report_failures(failures);
  std::cout << table;
  return 0;
}

// ---------------------------------------------------------------------------
// score-seg

int cmd_score_seg(const std::string& predicted, const std::string& reference, int rate,
                  const std::string& record, double tolerance_ms, const std::string& out) {
  require_exists(predicted);
  require_exists(reference);
  if (!record.empty()) {
    require_exists(record);
    rate = read_record(record).sampling_rate();
  }
  if (rate <= 0) throw ConfigError("--sampling-rate must be positive");
  const auto pred = read_annotations(predicted, rate);
  const auto ref = read_annotations(reference, rate);
  const auto table = format_score_table(score_segmentation(pred, ref, rate, tolerance_ms));
  if (!out.empty()) write_file(out, table);
  std::cout << table;
  return 0;
}

// ---------------------------------------------------------------------------
// render

int cmd_render(const std::string& record, const std::string& layout, const std::string& out) {
  require_exists(record);
  const auto rec = read_record(record);
  const auto img = render_ecg_image(rec, parse_layout(layout));
  const fs::path target(out);
  if (target.extension() == ".svg") {
    write_file(target, img.svg);
  } else if (target.extension() == ".png") {
    write_file(target, std::string(img.png.begin(), img.png.end()));
  } else {
    throw ConfigError("--out must end in .png or .svg");
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"ECG reasoning benchmark toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_dir;
  std::size_t jobs = default_jobs();
  app.add_option("--config-dir", config_dir, "Directory with catalog.json, diagrams.json, templates.json");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize records with ground-truth annotations");
  std::string spec_file, format = "bin", synth_out;
  std::vector<std::string> scenarios;
  std::size_t count = 0;
  std::uint64_t synth_seed = 0;
  synth->add_option("--spec", spec_file, "JSON synthesis spec; records differ by derived seed");
  synth->add_option("--scenarios", scenarios, "Scenario names (DX/PATH) or 'all'");
  synth->add_option("--count", count, "Number of records");
  synth->add_option("--seed", synth_seed, "Seed")->required();
  synth->add_option("--format", format, "bin or csv");
  synth->add_option("--out", synth_out, "Output directory")->required();
  auto* list = app.add_subcommand("scenarios", "List synthesis scenario names");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Delineate, measure, derive findings and diagnoses");
  std::vector<std::string> analyze_inputs;
  std::string analyze_out;
  analyze->add_option("inputs", analyze_inputs, "Record files or directories")->required();
  analyze->add_option("--out", analyze_out, "Output directory")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "Sample and build benchmark cases");
  std::string analyzed_dir, labels, gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t target = 100;
  std::vector<std::string> diagnoses;
  generate->add_option("analyzed", analyzed_dir, "Directory of .analysis.json files")->required();
  generate->add_option("--seed", gen_seed, "Seed")->required();
  generate->add_option("--target", target, "Cases per diagnosis and polarity");
  generate->add_option("--diagnoses", diagnoses, "Restrict to these diagnoses")->delimiter(',');
  generate->add_option("--labels", labels, "JSON record -> diagnosis -> bool label filter");
  generate->add_option("--out", gen_out, "Output directory")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run multi-turn sessions and score them");
  EvaluateArgs ev;
  std::string eval_out;
  evaluate->add_option("cases", ev.cases, "cases.jsonl")->required();
  auto* mock_opt = evaluate->add_option("--mock", ev.mock, "perfect, wrong, random:<seed>, script:<path>");
  auto* endpoint_opt = evaluate->add_option("--endpoint", ev.endpoint.base_url, "Model base URL");
  mock_opt->excludes(endpoint_opt);
  evaluate->add_option("--path", ev.endpoint.path, "Chat completion path");
  evaluate->add_option("--model", ev.endpoint.model, "Model name");
  evaluate->add_option("--timeout", ev.endpoint.timeout_s, "Request timeout, seconds");
  evaluate->add_option("--retries", ev.endpoint.max_retries, "Retries per request");
  evaluate->add_option("--rate", ev.rate, "Maximum requests per second");
  evaluate->add_option("--judge", ev.judge_url, "External judge base URL");
  evaluate->add_option("--judge-path", ev.judge_path, "External judge path");
  evaluate->add_option("--system-prompt", ev.system_prompt_file, "System prompt file");
  evaluate->add_flag("--image", ev.image, "Inline the rendered record with the first question");
  evaluate->add_flag("--fresh", ev.fresh, "Ignore existing transcripts instead of resuming");
  evaluate->add_option("--out", eval_out, "Output directory")->required();

  // score-seg
  auto* score = app.add_subcommand("score-seg", "Score predicted against reference annotations");
  std::string predicted, reference, score_record, score_out;
  int rate = 500;
  double tolerance = kDefaultToleranceMs;
  score->add_option("predicted", predicted, "Predicted annotations JSON")->required();
  score->add_option("reference", reference, "Reference annotations JSON")->required();
  score->add_option("--sampling-rate", rate, "Sampling rate of both annotation files");
  score->add_option("--record", score_record, "Record to take the sampling rate from");
  score->add_option("--tolerance-ms", tolerance, "Matching tolerance");
  score->add_option("--out", score_out, "Write the table to this file");

  // render
  auto* render = app.add_subcommand("render", "Render a record on a standard ECG grid");
  std::string render_record, layout = "grid", render_out;
  render->add_option("record", render_record, "Record file")->required();
  render->add_option("--layout", layout, "grid or stacked");
  render->add_option("--out", render_out, "Output .png or .svg")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) {
      return cmd_synth(spec_file, scenarios, count, synth_seed, format, synth_out, jobs, config_dir);
    }
    if (*list) {
      for (const auto& n : scenario_names()) std::cout << n << "\n";
      return 0;
    }
    if (*analyze) return cmd_analyze(analyze_inputs, analyze_out, jobs, config_dir);
    if (*generate) {
      return cmd_generate(analyzed_dir, gen_seed, target, diagnoses, labels, gen_out, jobs, config_dir);
    }
    if (*evaluate) {
      if (ev.mock.empty() && ev.endpoint.base_url.empty() && !std::getenv("ECGBENCH_BASE_URL")) {
        throw ConfigError("evaluate needs --mock or --endpoint (or ECGBENCH_BASE_URL)");
      }
      return cmd_evaluate(ev, eval_out, jobs, config_dir);
    }
    if (*score) return cmd_score_seg(predicted, reference, rate, score_record, tolerance, score_out);
    if (*render) return cmd_render(render_record, layout, render_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ecgbench::cli
