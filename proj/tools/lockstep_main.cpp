#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "lockstep/pipeline.hpp"
#include "lockstep/synthetic.hpp"

namespace {

using namespace lockstep;

// "<downloaders>x<domains>@<w>[,<w>...][/<missing>][:spread_domains|spread_downloaders|repeat]"
PlantedSpec parse_plant(const std::string& text) {
  static const std::regex re(R"((\d+)x(\d+)@([\d,]+)(?:/(\d+))?(?::(\w+))?)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw std::invalid_argument("bad --plant value: " + text);
  PlantedSpec p;
  p.downloaders = std::stoi(m[1]);
  p.domains = std::stoi(m[2]);
  std::stringstream ws(m[3]);
  for (std::string w; std::getline(ws, w, ',');) {
    if (!w.empty()) p.windows.push_back(std::stoi(w));
  }
  if (m[4].matched) p.missing_edges = std::stoi(m[4]);
  if (m[5].matched) {
    const auto layout = m[5].str();
    if (layout == "spread_domains") {
      p.layout = PlantLayout::SpreadDomains;
    } else if (layout == "spread_downloaders") {
      p.layout = PlantLayout::SpreadDownloaders;
    } else if (layout == "repeat") {
      p.layout = PlantLayout::Repeat;
    } else {
      throw std::invalid_argument("unknown layout: " + layout);
    }
  }
  return p;
}

std::optional<int> parse_level_cut(const std::string& text) {
  if (text == "none" || text == "off") return std::nullopt;
  const int v = std::stoi(text);
  if (v <= 0) throw std::invalid_argument("level cut must be positive or 'none'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lockstep detection over downloader-domain event streams"};
  app.require_subcommand(1);

  RunConfig run;
  std::string mode = "offline";
  std::string orientation = "dlr:dom";
  std::string delta_T = "3d";
  std::string delta_t = "3d";
  std::string level_cut = "7";
  std::string batch_period;
  std::string events_path;
  std::string psl, whitelist, ground_truth, out_dir, metrics;
  bool no_metrics = false;
  bool no_supplement = false;

  auto* run_cmd = app.add_subcommand("run", "Detect locksteps in an event file");
  run_cmd->add_option("--mode", mode, "offline or streaming")
      ->check(CLI::IsMember({"offline", "streaming"}))
      ->capture_default_str();
  run_cmd->add_option("--orientation", orientation, "dlr:dom or dom:dlr")->capture_default_str();
  run_cmd->add_option("--delta-T", delta_T, "Window length (e.g. 3d, 72h)")->capture_default_str();
  run_cmd->add_option("--delta-t", delta_t, "Window slide")->capture_default_str();
  run_cmd->add_option("--alpha-min", run.engine.window.alpha_min, "Minimum edge density")
      ->capture_default_str();
  run_cmd->add_option("--level-cut", level_cut, "FP tree depth limit or 'none'")
      ->capture_default_str();
  run_cmd->add_option("--campaign-n", run.engine.window.campaign_gap_n,
                      "Campaign split gap in slides")
      ->capture_default_str();
  run_cmd->add_option("--events", events_path, "Tab-separated event file")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--psl", psl, "Public suffix list")->check(CLI::ExistingFile);
  run_cmd->add_option("--whitelist", whitelist, "Benign downloader list")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--ground-truth", ground_truth, "Binary label table")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--metrics", metrics, "Metrics CSV path (default <out>/metrics.csv)");
  run_cmd->add_flag("--no-metrics", no_metrics, "Do not write metrics");
  run_cmd->add_option("--supplement-parallelism", run.engine.supplement_parallelism,
                      "Supplementation worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd->add_flag("--no-supplement", no_supplement, "Skip the supplementation pass");
  run_cmd->add_flag("--dump-candidates", run.engine.record_candidates,
                    "Write every FP tree candidate to <out>/candidates.jsonl");
  run_cmd->add_option("--batch-period", batch_period, "Streaming batch length (default: slide)");

  SyntheticSpec gen;
  std::string gen_delta_T = "3d";
  std::string gen_delta_t = "3d";
  std::vector<std::string> plants;
  std::string gen_out;
  std::string manifest;
  auto* gen_cmd = app.add_subcommand("generate", "Write a seeded synthetic event stream");
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--windows", gen.windows, "Number of windows")->capture_default_str();
  gen_cmd->add_option("--delta-T", gen_delta_T, "Window length")->capture_default_str();
  gen_cmd->add_option("--delta-t", gen_delta_t, "Window slide")->capture_default_str();
  gen_cmd->add_option("--start", gen.start_time, "Start time (seconds)")->capture_default_str();
  gen_cmd->add_option("--downloaders", gen.downloader_universe, "Downloader universe size")
      ->capture_default_str();
  gen_cmd->add_option("--domains", gen.domain_universe, "Domain universe size")
      ->capture_default_str();
  gen_cmd->add_option("--payloads", gen.payload_universe, "Payload universe size")
      ->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise_events_per_window, "Noise events per window")
      ->capture_default_str();
  gen_cmd->add_option("--plant", plants,
                      "Planted structure DxM@w[,w...][/missing][:layout] (repeatable)");
  gen_cmd->add_option("--out", gen_out, "Event file (default stdout)");
  gen_cmd->add_option("--manifest", manifest, "Ground-truth manifest JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      run.mode = parse_mode(mode);
      run.engine.orientation = parse_orientation(orientation);
      run.engine.window.window_length = parse_duration(delta_T);
      run.engine.window.slide = parse_duration(delta_t);
      run.engine.window.level_cut = parse_level_cut(level_cut);
      run.engine.supplement = !no_supplement;
      run.engine.window.validate();
      run.events = events_path;
      if (!psl.empty()) run.psl = psl;
      if (!whitelist.empty()) run.whitelist = whitelist;
      if (!ground_truth.empty()) run.ground_truth = ground_truth;
      if (!out_dir.empty()) run.out_dir = out_dir;
      if (!metrics.empty()) run.metrics = metrics;
      run.metrics_enabled = !no_metrics;
      if (!batch_period.empty()) run.batch_period = parse_duration(batch_period);
      if (run.engine.record_candidates && !run.out_dir) {
        throw std::invalid_argument("--dump-candidates requires --out");
      }

      const auto summary = lockstep::run(run);
      std::cout << "mode=" << to_string(run.mode) << " batches=" << summary.batches
                << " events=" << summary.events << " diagnostics=" << summary.diagnostics
                << " stars=" << summary.stars << " locksteps=" << summary.locksteps << '\n';
      return 0;
    }

    gen.window_length = parse_duration(gen_delta_T);
    gen.slide = parse_duration(gen_delta_t);
    for (const auto& p : plants) gen.planted.push_back(parse_plant(p));
    const auto stream = generate_synthetic_stream(gen);
    if (gen_out.empty()) {
      write_records(std::cout, stream.records);
    } else {
      std::ofstream out(gen_out, std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + gen_out);
      write_records(out, stream.records);
    }
    if (!manifest.empty()) {
      std::ofstream out(manifest, std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + manifest);
      out << manifest_to_json(gen, stream) << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "lockstep: " << e.what() << '\n';
    return 1;
  }
}
