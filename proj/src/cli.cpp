#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gm/cli.hpp"
#include "gm/csv.hpp"
#include "gm/errors.hpp"
#include "gm/pipeline.hpp"
#include "gm/synth.hpp"

namespace gm {

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out.good()) throw IoError("failed writing " + path.string());
}

// Pipeline options shared by prepare/detect/features. Flags override values
// from --config.
struct ConfigFlags {
  std::string config_path;
  std::string localisations;
  int window_length = 0;
  int keep_frequencies = 0;
  int detector_window = 0;
  double movement_threshold = 0.0;
  bool auto_threshold = false;
  int end_patience = 0;
  int min_gesture_windows = 0;
  double min_duration = 0.0;
  std::uint64_t seed = 0;

  CLI::Option* opt_localisations = nullptr;
  CLI::Option* opt_window_length = nullptr;
  CLI::Option* opt_keep = nullptr;
  CLI::Option* opt_detector_window = nullptr;
  CLI::Option* opt_threshold = nullptr;
  CLI::Option* opt_auto = nullptr;
  CLI::Option* opt_patience = nullptr;
  CLI::Option* opt_min_windows = nullptr;
  CLI::Option* opt_min_duration = nullptr;
  CLI::Option* opt_seed = nullptr;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "Pipeline config JSON (flags below override it)");
  flags.opt_localisations = cmd->add_option(
      "--localisations", flags.localisations,
      "Comma-separated localisation set, e.g. hands,head,legs[,feet]");
  flags.opt_window_length = cmd->add_option(
      "--window-length", flags.window_length, "Smoothing window in frames");
  flags.opt_keep =
      cmd->add_option("--keep-frequencies", flags.keep_frequencies,
                      "Frequency bins kept per smoothing window");
  flags.opt_detector_window =
      cmd->add_option("--detector-window", flags.detector_window,
                      "Detection window length in frames");
  flags.opt_threshold =
      cmd->add_option("--movement-threshold", flags.movement_threshold,
                      "Window movement threshold in px/frame");
  flags.opt_auto = cmd->add_flag("--auto-threshold", flags.auto_threshold,
                                 "Per-sample 75th-percentile threshold");
  flags.opt_patience =
      cmd->add_option("--end-patience", flags.end_patience,
                      "Consecutive quiet windows that end a gesture");
  flags.opt_min_windows =
      cmd->add_option("--min-gesture-windows", flags.min_gesture_windows,
                      "Minimum gesture length in windows");
  flags.opt_min_duration =
      cmd->add_option("--min-duration", flags.min_duration,
                      "Minimum sample duration in seconds");
  flags.opt_seed = cmd->add_option("--seed", flags.seed, "Pipeline seed");
}

PipelineConfig resolve_config(const ConfigFlags& flags) {
  PipelineConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = pipeline_config_from_json(read_text_file(flags.config_path));
  }
  if (flags.opt_localisations->count() > 0) {
    cfg.localisation_names.clear();
    std::stringstream ss(flags.localisations);
    std::string token;
    while (std::getline(ss, token, ',')) {
      if (!token.empty()) {
        cfg.localisation_names.push_back(localisation_from_string(token));
      }
    }
  }
  if (flags.opt_window_length->count() > 0) {
    cfg.smoothing.window_length = flags.window_length;
  }
  if (flags.opt_keep->count() > 0) {
    cfg.smoothing.keep_frequencies = flags.keep_frequencies;
  }
  if (flags.opt_detector_window->count() > 0) {
    cfg.detector.window_length = flags.detector_window;
  }
  if (flags.opt_threshold->count() > 0) {
    cfg.detector.movement_threshold = flags.movement_threshold;
  }
  if (flags.opt_auto->count() > 0) {
    cfg.detector.auto_threshold = flags.auto_threshold;
  }
  if (flags.opt_patience->count() > 0) {
    cfg.detector.end_patience = flags.end_patience;
  }
  if (flags.opt_min_windows->count() > 0) {
    cfg.detector.min_gesture_windows = flags.min_gesture_windows;
  }
  if (flags.opt_min_duration->count() > 0) {
    cfg.min_duration_s = flags.min_duration;
  }
  if (flags.opt_seed->count() > 0) cfg.seed = flags.seed;
  cfg.validate();
  return cfg;
}

long count_spans(const std::vector<DetectedSample>& detected) {
  long n = 0;
  for (const DetectedSample& d : detected) {
    for (const AnalyzedTrack& t : d.analysis.tracks) {
      for (const UnitTrackData& u : t.units) {
        n += static_cast<long>(u.spans.size());
      }
    }
  }
  return n;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Gesture meta-feature pipeline for 2-D pose time series"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_out, synth_config;
  std::uint64_t synth_seed = 1;
  int synth_jobs = 1;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--config", synth_config, "Generator config JSON");
  auto* synth_seed_opt =
      synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--jobs", synth_jobs, "Worker threads");

  // ---- prepare ----
  auto* prepare = app.add_subcommand(
      "prepare", "Ingest, recover and smooth pose sequences");
  std::string prepare_manifest, prepare_out;
  int prepare_jobs = 1;
  ConfigFlags prepare_flags;
  prepare->add_option("--manifest", prepare_manifest, "Manifest CSV")
      ->required();
  prepare->add_option("--out", prepare_out, "Prepared checkpoint path")
      ->required();
  prepare->add_option("--jobs", prepare_jobs, "Worker threads");
  add_config_flags(prepare, prepare_flags);

  // ---- detect ----
  auto* detect = app.add_subcommand("detect", "Detect gestures per unit");
  std::string detect_prepared, detect_manifest, detect_out;
  int detect_jobs = 1;
  ConfigFlags detect_flags;
  detect->add_option("--prepared", detect_prepared, "Prepared checkpoint");
  detect->add_option("--manifest", detect_manifest,
                     "Manifest CSV (runs preparation in memory)");
  detect->add_option("--out", detect_out, "Gesture dump path")->required();
  detect->add_option("--jobs", detect_jobs, "Worker threads");
  add_config_flags(detect, detect_flags);

  // ---- features ----
  auto* features =
      app.add_subcommand("features", "Compute per-sample gesture features");
  std::string features_manifest, features_prepared, features_gestures,
      features_out;
  int features_jobs = 1;
  ConfigFlags features_flags;
  features->add_option("--manifest", features_manifest,
                       "Manifest CSV (single-shot pipeline)");
  features->add_option("--prepared", features_prepared,
                       "Prepared checkpoint (staged pipeline)");
  features->add_option("--gestures", features_gestures,
                       "Gesture dump (staged pipeline)");
  features->add_option("--out", features_out, "Feature CSV path")->required();
  features->add_option("--jobs", features_jobs, "Worker threads");
  add_config_flags(features, features_flags);

  // ---- evaluate / search ----
  auto add_eval_options = [](CLI::App* cmd, std::string& features_path,
                             std::string& manifest_path, std::string& out_path,
                             EvaluationRequest& request,
                             std::uint64_t& eval_seed, double& threshold,
                             CLI::Option*& threshold_opt,
                             std::string& classifier_name) {
    cmd->add_option("--features", features_path, "Feature CSV")->required();
    cmd->add_option("--manifest", manifest_path, "Manifest CSV with labels")
        ->required();
    cmd->add_option("--out", out_path, "Report JSON path")->required();
    cmd->add_option("--label", request.label, "Label column to classify")
        ->required();
    cmd->add_option("--classifier", classifier_name,
                    "Classifier: lin|log|svm|rf");
    threshold_opt = cmd->add_option("--threshold", threshold,
                                    "Label binarization threshold override");
    cmd->add_option("--folds", request.folds, "Cross-validation folds");
    cmd->add_option("--seed", eval_seed, "Fold shuffling seed");
    cmd->add_option("--jobs", request.jobs, "Worker threads");
  };

  auto* evaluate =
      app.add_subcommand("evaluate", "Cross-validate a classifier");
  std::string eval_features, eval_manifest, eval_out, eval_classifier = "lin";
  EvaluationRequest eval_request;
  std::uint64_t eval_seed = 0;
  double eval_threshold = 0.0;
  CLI::Option* eval_threshold_opt = nullptr;
  add_eval_options(evaluate, eval_features, eval_manifest, eval_out,
                   eval_request, eval_seed, eval_threshold, eval_threshold_opt,
                   eval_classifier);
  evaluate->add_flag("--search", eval_request.search,
                     "Run the exhaustive feature search instead of all "
                     "features");

  auto* search =
      app.add_subcommand("search", "Exhaustive feature-subset search");
  std::string search_features, search_manifest, search_out,
      search_classifier = "lin";
  EvaluationRequest search_request;
  search_request.search = true;
  std::uint64_t search_seed = 0;
  double search_threshold = 0.0;
  CLI::Option* search_threshold_opt = nullptr;
  add_eval_options(search, search_features, search_manifest, search_out,
                   search_request, search_seed, search_threshold,
                   search_threshold_opt, search_classifier);
  search->add_option("--max-features", search_request.max_search_features,
                     "Search-width guard");
  search->add_flag("--allow-large", search_request.allow_large_search,
                   "Override the search-width guard");

  // ---- report ----
  auto* report = app.add_subcommand("report", "Merge evaluation reports");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report->add_option("inputs", report_inputs, "Evaluation report JSONs")
      ->required();
  report->add_option("--out", report_out, "Merged report path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      return app.exit(e);
    }
    app.exit(e);
    return 1;
  }

  if (synth->parsed()) {
    SynthConfig cfg;
    if (!synth_config.empty()) {
      cfg = synth_config_from_json(read_text_file(synth_config));
    }
    if (synth_seed_opt->count() > 0) cfg.seed = synth_seed;
    SynthDataset dataset = generate_dataset(cfg, synth_out, synth_jobs);
    for (const std::string& w : dataset.warnings) {
      std::cerr << "warning: " << w << "\n";
    }
    long spans = 0;
    for (const SampleTruth& t : dataset.truth) {
      spans += static_cast<long>(t.spans.size());
    }
    std::cout << "synth: wrote " << dataset.truth.size() << " samples ("
              << 2 * cfg.participants_per_class << " participants, " << spans
              << " planted gestures) under " << synth_out << "\n";
    return 0;
  }

  if (prepare->parsed()) {
    PipelineConfig cfg = resolve_config(prepare_flags);
    Manifest manifest = load_manifest(prepare_manifest);
    std::vector<PreparedSample> prepared =
        run_prepare(manifest, cfg, prepare_jobs);
    write_prepared_file(prepare_out, prepared, cfg);
    std::cout << "prepare: kept " << prepared.size() << " of "
              << manifest.samples.size() << " samples -> " << prepare_out
              << " (config " << config_hash(cfg) << ")\n";
    return 0;
  }

  if (detect->parsed()) {
    PipelineConfig cfg = resolve_config(detect_flags);
    if (detect_prepared.empty() == detect_manifest.empty()) {
      throw ValidationError(
          "detect: pass exactly one of --prepared or --manifest");
    }
    std::vector<PreparedSample> prepared;
    if (!detect_prepared.empty()) {
      PreparedFile file = read_prepared_file(detect_prepared);
      if (file.config_hash != config_hash(cfg)) {
        throw ValidationError("detect: config hash mismatch: " +
                              std::string(detect_prepared) + " has " +
                              file.config_hash + ", flags give " +
                              config_hash(cfg));
      }
      prepared = std::move(file.samples);
    } else {
      prepared = run_prepare(load_manifest(detect_manifest), cfg, detect_jobs);
    }
    std::vector<DetectedSample> detected =
        run_detect(prepared, cfg, detect_jobs);
    write_gesture_dump(detect_out, detected, prepared, cfg);
    std::cout << "detect: " << count_spans(detected) << " gesture spans in "
              << detected.size() << " samples -> " << detect_out << "\n";
    return 0;
  }

  if (features->parsed()) {
    PipelineConfig cfg = resolve_config(features_flags);
    bool staged = !features_prepared.empty() || !features_gestures.empty();
    bool single = !features_manifest.empty();
    if (single == staged ||
        (staged && (features_prepared.empty() || features_gestures.empty()))) {
      throw ValidationError(
          "features: pass either --manifest or both --prepared and "
          "--gestures");
    }
    FeatureMatrix matrix;
    if (single) {
      std::vector<PreparedSample> prepared =
          run_prepare(load_manifest(features_manifest), cfg, features_jobs);
      std::vector<DetectedSample> detected =
          run_detect(prepared, cfg, features_jobs);
      matrix = run_features(detected, prepared, cfg);
    } else {
      PreparedFile file = read_prepared_file(features_prepared);
      GestureDump dump = read_gesture_dump(features_gestures);
      std::string expected = config_hash(cfg);
      if (file.config_hash != expected) {
        throw ValidationError("features: prepared checkpoint hash " +
                              file.config_hash + " does not match flags (" +
                              expected + ")");
      }
      if (dump.config_hash != expected) {
        throw ValidationError("features: gesture dump hash " +
                              dump.config_hash + " does not match flags (" +
                              expected + ")");
      }
      std::vector<DetectedSample> detected =
          attach_spans(file.samples, dump, cfg);
      matrix = run_features(detected, file.samples, cfg);
    }
    write_feature_csv(features_out, matrix, config_hash(cfg), cfg.seed);
    std::cout << "features: " << matrix.sample_count() << " samples x "
              << matrix.feature_count() << " features -> " << features_out
              << "\n";
    return 0;
  }

  auto run_eval_command =
      [](const std::string& features_path, const std::string& manifest_path,
         const std::string& out_path, EvaluationRequest request,
         std::uint64_t seed, const CLI::Option* threshold_opt,
         double threshold, const std::string& classifier_name) {
        request.classifier.kind = classifier_from_string(classifier_name);
        request.classifier.seed = seed;
        if (threshold_opt->count() > 0) request.threshold_override = threshold;
        FeatureFile file = read_feature_csv(features_path);
        Manifest manifest = load_manifest(manifest_path);
        EvaluationOutcome outcome =
            run_evaluation(file.matrix, manifest, request, seed);
        write_text_file(
            out_path,
            evaluation_report_json(outcome, request, file.config_hash, seed));
        for (const std::string& w : outcome.warnings) {
          std::cerr << "warning: " << w << "\n";
        }
        std::cout << (request.search ? "search" : "evaluate") << ": label "
                  << request.label << ", f1_mean "
                  << format_double(outcome.report.f1_mean) << " (std "
                  << format_double(outcome.report.f1_std) << ", "
                  << outcome.rows_used << " samples";
        if (request.search) {
          std::cout << ", " << outcome.masks_evaluated << " masks";
        }
        std::cout << ") -> " << out_path << "\n";
        return 0;
      };

  if (evaluate->parsed()) {
    return run_eval_command(eval_features, eval_manifest, eval_out,
                            eval_request, eval_seed, eval_threshold_opt,
                            eval_threshold, eval_classifier);
  }
  if (search->parsed()) {
    return run_eval_command(search_features, search_manifest, search_out,
                            search_request, search_seed, search_threshold_opt,
                            search_threshold, search_classifier);
  }

  if (report->parsed()) {
    std::vector<std::filesystem::path> paths(report_inputs.begin(),
                                             report_inputs.end());
    write_text_file(report_out, merge_reports(paths));
    std::cout << "report: merged " << paths.size() << " reports -> "
              << report_out << "\n";
    return 0;
  }

  return 1;  // unreachable with require_subcommand(1)
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gm
