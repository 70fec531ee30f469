#pragma once

// Command-line front end. run_cli() is the whole program minus process
// setup so tests can drive it in-process.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 data validation.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wtrack/ini.hpp"
#include "wtrack/metrics.hpp"
#include "wtrack/mot_io.hpp"
#include "wtrack/pipeline.hpp"
#include "wtrack/synth.hpp"
#include "wtrack/tracker.hpp"

#ifndef WTRACK_SCENARIO_DIR
#define WTRACK_SCENARIO_DIR "scenarios"
#endif

namespace wtrack::cli {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kData = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct TrackerOptions {
  std::string l1;
  std::optional<std::string> l2;
  std::string config;
  std::vector<std::string> overrides;
};

inline TrackerPair resolve(const TrackerOptions& o) {
  TrackerPair pair;
  if (!o.config.empty()) load_config_file(pair, o.config);
  for (const auto& s : o.overrides) apply_override(pair, s);
  pair.l1.kind = *parse_tracker_kind(o.l1);
  if (o.l2) pair.l2.kind = *parse_tracker_kind(*o.l2);
  pair.l1.validate();
  pair.l2.validate();
  return pair;
}

inline void add_tracker_options(CLI::App* cmd, TrackerOptions& o, bool l2_required) {
  cmd->add_option("--l1", o.l1, "Level-1 (base) tracker")
      ->required()
      ->check(CLI::IsMember({"sort", "bytetrack", "ocsort"}));
  auto* l2 = cmd->add_option("--l2", o.l2, "Level-2 tracker; enables windowed ID correction")
                 ->check(CLI::IsMember({"bytetrack", "ocsort"}));
  if (l2_required) l2->required();
  cmd->add_option("--config", o.config, "Tracker config file ([tracker], [l1], [l2] sections)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "Override a config value, e.g. l1.max_age=5");
}

inline std::vector<ReportRow> eval_rows(const std::vector<std::string>& gt, const std::vector<std::string>& res) {
  if (gt.size() != res.size())
    throw UsageError("--gt and --res must be given the same number of times");
  MetricsAccumulator acc;
  for (std::size_t i = 0; i < gt.size(); ++i)
    acc.add(to_eval_sequence(read_ground_truth(gt[i])), to_eval_sequence(read_results(res[i])));
  return {ReportRow{"", "", "", acc.report()}};
}

inline std::filesystem::path resolve_scenario(const std::string& arg) {
  if (std::filesystem::exists(arg)) return arg;
  const std::filesystem::path bundled = std::filesystem::path(WTRACK_SCENARIO_DIR) / (arg + ".ini");
  if (std::filesystem::exists(bundled)) return bundled;
  throw MotIoError("no scenario file or bundled scenario named '" + arg + "'");
}

inline std::vector<int> parse_k_values(const std::string& s) {
  std::vector<int> ks;
  std::stringstream in(s);
  for (std::string tok; std::getline(in, tok, ',');) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(tok, &used);
      if (used != tok.size() || k < 1) throw std::invalid_argument(tok);
      ks.push_back(k);
    } catch (const std::exception&) {
      throw UsageError("--k-values expects positive integers separated by commas, got '" + s + "'");
    }
  }
  if (ks.empty()) throw UsageError("--k-values is empty");
  return ks;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tracking-by-detection with windowed two-level ID correction", "wtrack"};
  app.require_subcommand(1);

  // track
  detail::TrackerOptions track_opts;
  std::string track_det, track_out;
  std::optional<int> track_k;
  auto* track = app.add_subcommand("track", "Run a base tracker, or a windowed L1/L2 pair with --l2 and -k");
  track->add_option("--det", track_det, "MOT detection file")->required();
  track->add_option("--out", track_out, "Result file to write")->required();
  track->add_option("-k", track_k, "Window length in frames (requires --l2; default 2)");
  detail::add_tracker_options(track, track_opts, false);

  // eval
  std::vector<std::string> eval_gt, eval_res;
  std::string eval_format = "table";
  auto* eval = app.add_subcommand("eval", "Evaluate result files against ground truth (pooled)");
  eval->add_option("--gt", eval_gt, "Ground-truth file (repeatable)")->required();
  eval->add_option("--res", eval_res, "Result file, paired with --gt in order (repeatable)")->required();
  eval->add_option("--format", eval_format)->check(CLI::IsMember({"table", "csv"}));

  // sweep
  detail::TrackerOptions sweep_opts;
  std::vector<std::string> sweep_det, sweep_gt;
  std::string sweep_ks = "2,3,5,10";
  std::string sweep_format = "table";
  auto* sweep = app.add_subcommand("sweep", "Compare the base tracker against windowed runs for several k");
  sweep->add_option("--det", sweep_det, "Detection file (repeatable)")->required();
  sweep->add_option("--gt", sweep_gt, "Ground-truth file, paired with --det in order (repeatable)")->required();
  sweep->add_option("--k-values", sweep_ks, "Comma-separated window lengths");
  sweep->add_option("--format", sweep_format)->check(CLI::IsMember({"table", "csv"}));
  detail::add_tracker_options(sweep, sweep_opts, true);

  // synth
  std::string synth_scenario, synth_out_dir;
  auto* synth = app.add_subcommand("synth", "Write gt.txt and det.txt for a synthetic scenario");
  synth->add_option("--scenario", synth_scenario, "Scenario file or bundled scenario name")->required();
  synth->add_option("--out-dir", synth_out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*track) {
      if (track_k && !track_opts.l2) throw UsageError("-k needs --l2");
      if (track_k && *track_k < 1) throw UsageError("-k must be >= 1");
      const TrackerPair pair = detail::resolve(track_opts);
      const DetectionSet dets = read_detections(track_det);
      for (const auto& d : dets.diagnostics) err << "warning: " << track_det << ": " << d << '\n';
      if (dets.clamped_confidences > 0)
        err << "warning: " << track_det << ": clamped " << dets.clamped_confidences << " confidences to [0, 1]\n";
      const auto result = track_opts.l2 ? run_windowed(pair.l1, pair.l2, track_k.value_or(2), dets)
                                        : run_base(pair.l1, dets);
      write_results(track_out, result);
    } else if (*eval) {
      const auto rows = detail::eval_rows(eval_gt, eval_res);
      out << (eval_format == "csv" ? format_csv(rows, false) : format_table(rows, false));
    } else if (*sweep) {
      if (sweep_det.size() != sweep_gt.size())
        throw UsageError("--det and --gt must be given the same number of times");
      const std::vector<int> ks = detail::parse_k_values(sweep_ks);
      const TrackerPair pair = detail::resolve(sweep_opts);
      std::vector<DetectionSet> dets;
      std::vector<EvalSequence> gts;
      for (std::size_t i = 0; i < sweep_det.size(); ++i) {
        dets.push_back(read_detections(sweep_det[i]));
        gts.push_back(to_eval_sequence(read_ground_truth(sweep_gt[i])));
      }
      auto evaluate_all = [&](auto&& run) {
        MetricsAccumulator acc;
        for (std::size_t i = 0; i < dets.size(); ++i) {
          const auto tracked = run(dets[i]);
          acc.add(gts[i], to_eval_sequence(tracked));
        }
        return acc.report();
      };
      std::vector<ReportRow> rows;
      const std::string l1_name{to_string(pair.l1.kind)};
      const std::string l2_name{to_string(pair.l2.kind)};
      rows.push_back({l1_name, "", "", evaluate_all([&](const DetectionSet& d) { return run_base(pair.l1, d); })});
      for (int k : ks)
        rows.push_back({l1_name, l2_name, std::to_string(k),
                        evaluate_all([&](const DetectionSet& d) { return run_windowed(pair.l1, pair.l2, k, d); })});
      out << (sweep_format == "csv" ? format_csv(rows, true) : format_table(rows, true));
    } else if (*synth) {
      const Scenario scenario = load_scenario(detail::resolve_scenario(synth_scenario));
      const SyntheticSequence seq = generate(scenario);
      std::error_code ec;
      std::filesystem::create_directories(synth_out_dir, ec);
      if (ec) throw MotIoError("cannot create '" + synth_out_dir + "': " + ec.message());
      const std::filesystem::path dir(synth_out_dir);
      write_ground_truth(dir / "gt.txt", seq.ground_truth);
      write_detections(dir / "det.txt", seq.detections);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const MotIoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}

}  // namespace wtrack::cli
