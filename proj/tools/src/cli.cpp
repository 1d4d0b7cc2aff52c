#include "ascsense_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ascsense/acceptance.hpp"
#include "ascsense/config.hpp"
#include "ascsense/csi_io.hpp"
#include "ascsense/harness.hpp"
#include "ascsense/outputs.hpp"
#include "json.hpp"

namespace ascsense::cli {

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> methods;
  std::optional<int> trials;
  std::vector<double> snr;
  std::vector<double> dyn_prop;
  std::vector<double> tau_sep;
  std::optional<int> workers;
  bool check = false;
  int verbose = 0;

  // subcommand specific
  int point = 0;
  int trial = 0;
  std::string csi;
  std::string reference;
  std::string method = "prop_sub";
  std::vector<int> criteria;
  double trial_scale = 1.0;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig resolve_config(const Options& o, bool two_targets = false) {
  ExperimentConfig cfg;
  if (!o.config.empty()) {
    try {
      cfg = load_config(o.config);
    } catch (const Error& e) {
      if (e.code() == Errc::format) throw ConfigError(e.what());
      throw;
    }
  }
  try {
    if (o.seed) cfg.seed = *o.seed;
    if (!o.methods.empty()) {
      cfg.methods.clear();
      for (const auto& m : o.methods) cfg.methods.push_back(parse_method(m));
    }
    if (o.trials) cfg.trials = *o.trials;
    if (!o.snr.empty()) cfg.snr_db = o.snr;
    if (!o.dyn_prop.empty()) cfg.dyn_prop = o.dyn_prop;
    if (!o.tau_sep.empty()) cfg.tau_sep = o.tau_sep;
    if (two_targets) {
      cfg.scenario.n_dynamic = 2;
      if (cfg.tau_sep.empty())
        for (int i = 1; i <= 13; ++i) cfg.tau_sep.push_back(0.3 * i);
    }
    if (o.workers) {
      cfg.workers = *o.workers;
    } else if (const char* env = std::getenv("ASCSENSE_WORKERS")) {
      cfg.workers = std::stoi(env);
    }
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  } catch (const std::logic_error&) {
    throw ConfigError("ASCSENSE_WORKERS is not an integer");
  }
  return cfg;
}

std::filesystem::path prepare_out(const Options& o, const ExperimentConfig& cfg) {
  std::filesystem::path dir(o.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, o.out + ": " + ec.message());
  save_config((dir / "resolved_config.json").string(), cfg);
  return dir;
}

SweepPoint point_at(const ExperimentConfig& cfg, int index) {
  const auto pts = sweep_points(cfg);
  if (index < 0 || index >= static_cast<int>(pts.size()))
    throw ConfigError("point index out of range (" + std::to_string(pts.size()) + " points)");
  return pts[index];
}

int cmd_simulate(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const auto dir = prepare_out(o, cfg);
  const SweepPoint pt = point_at(cfg, o.point);
  const TrialInputs in = synthesize_trial(cfg, pt, o.trial, true);

  CsiDump dump;
  dump.M = in.system.M;
  dump.K = in.system.K;
  dump.T = in.system.T;
  dump.delta_f = in.system.delta_f;
  dump.delta_t = in.system.delta_t;
  dump.data = in.raw.data;
  write_csi_dump((dir / "csi.ascs").string(), dump);
  if (!in.reference.empty()) save_reference((dir / "reference.asrf").string(), in.reference, in.system);

  nlohmann::json truth;
  truth["point"] = pt.index;
  truth["trial"] = o.trial;
  truth["noise_power"] = in.system.noise_power;
  for (const auto& d : in.scenario.dynamics)
    truth["dynamic"].push_back({{"range_m", delay_to_range(d.delay)},
                                {"aoa_deg", d.aoa * 180.0 / kPi},
                                {"speed_mps", d.delay_rate * kSpeedOfLight}});
  truth["to_s"] = std::vector<double>(in.scenario.offsets.to.data(),
                                      in.scenario.offsets.to.data() + in.scenario.offsets.to.size());
  if (!in.reference_error.empty()) truth["calibration_error"] = in.reference_error;
  std::ofstream f(dir / "truth.json");
  f << truth.dump(2) << "\n";
  if (!f) throw Error(Errc::io, (dir / "truth.json").string() + ": write failed");
  std::cout << "wrote " << (dir / "csi.ascs").string() << "\n";
  return kExitOk;
}

int cmd_sweep(const Options& o, bool resolve) {
  const ExperimentConfig cfg = resolve_config(o, resolve);
  const auto dir = prepare_out(o, cfg);
  const SweepTable table = run_sweep(cfg);
  emit_outputs(table, dir.string());
  if (resolve) {
    std::ofstream f(dir / "resolution.csv");
    f << "tau_sep_m,snr_db,dyn_prop,method,probability\n";
    for (const auto& a : aggregate(table))
      f << a.tau_sep << ',' << a.snr_db << ',' << a.dyn_prop << ',' << to_string(a.method) << ','
        << a.resolution << '\n';
    if (!f) throw Error(Errc::io, (dir / "resolution.csv").string() + ": write failed");
  }
  if (o.verbose > 0)
    for (const auto& a : aggregate(table))
      std::cout << "point " << a.point << ' ' << to_string(a.method) << " rel_to=" << a.rel_to_median
                << " abs_to=" << a.abs_to_median << " delay=" << a.delay_median
                << " gamma=" << a.gamma_median << " resolution=" << a.resolution << "\n";
  std::cout << table.trials.size() << " rows written to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_calibrate(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const auto dir = prepare_out(o, cfg);
  const SweepPoint pt = point_at(cfg, o.point);
  const TrialInputs in = synthesize_trial(cfg, pt, o.trial, true);
  if (in.reference.empty()) throw Error(Errc::degenerate, "calibration failed: " + in.reference_error);
  save_reference((dir / "reference.asrf").string(), in.reference, in.system);
  const CVec hs = in.scenario.statics.merged(in.system, in.geometry);
  const double match = std::abs(in.reference.h.dot(hs)) / hs.norm();
  std::cout << "clock error estimate " << in.reference.clock_error_estimate * 1e9 << " ns, |<ref, h_s>|/|h_s| = "
            << match << "\n";
  return kExitOk;
}

int cmd_replay(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  if (o.csi.empty()) throw ConfigError("replay needs --csi");
  const CsiDump dump = read_csi_dump(o.csi);
  SystemConfig sys = cfg.system;
  if (dump.M != sys.M || dump.K != sys.K || dump.delta_f != sys.delta_f)
    throw ConfigError(o.csi + ": dump does not match the configured system (M, K, delta_f)");
  sys.T = dump.T;
  sys.delta_t = dump.delta_t;
  const Method method = parse_method(o.method);
  ReferenceStaticResponse ref;
  if (!o.reference.empty()) ref = load_reference(o.reference, sys);
  const CsiMatrix raw{dump.data, Stage::raw, 0};
  if (ref.empty()) {
    if (method == Method::synchronized) throw ConfigError("synchronized replay needs --reference");
    AlignmentOptions a = cfg.align;
    a.method = method == Method::prop_cov ? AlignMethod::covariance : AlignMethod::subspace;
    ref = alternative_reference(align_stream(raw, sys, a).aligned);
  }
  const auto dir = prepare_out(o, cfg);
  PipelineOptions popts = pipeline_options(cfg);
  const PipelineOutput po = run_pipeline(method, raw, ref, sys, make_geometry(cfg), popts);

  std::ofstream f(dir / "estimates.csv");
  f.precision(17);
  f << "target,range_m,aoa_deg,peak_height,doppler_mps\n";
  for (std::size_t l = 0; l < po.targets.delays.size(); ++l) {
    const CVec cgs = po.targets.cgs.row(static_cast<Eigen::Index>(l)).transpose();
    f << l << ',' << delay_to_range(po.targets.delays[l]) << ',' << po.targets.aoas[l] * 180.0 / kPi
      << ',' << po.peaks.peaks[l].height << ',' << (sys.T >= 8 ? doppler_readout(cgs, sys) : 0.0)
      << '\n';
  }
  std::ofstream g(dir / "relative_to.csv");
  g.precision(17);
  g << "snapshot,relative_to_s\n";
  for (Eigen::Index t = 0; t < po.alignment.relative_to.size(); ++t)
    g << t << ',' << po.alignment.relative_to(t) << '\n';
  if (!f || !g) throw Error(Errc::io, dir.string() + ": write failed");
  std::cout << "residual " << po.residual * 1e9 << " ns, " << po.targets.delays.size()
            << " targets\n";
  return kExitOk;
}

int cmd_check(const Options& o) {
  AcceptanceOptions a;
  if (o.seed) a.seed = *o.seed;
  if (o.workers) {
    a.workers = *o.workers;
  } else if (const char* env = std::getenv("ASCSENSE_WORKERS")) {
    try {
      a.workers = std::stoi(env);
    } catch (const std::logic_error&) {
      throw ConfigError("ASCSENSE_WORKERS is not an integer");
    }
  }
  a.trial_scale = o.trial_scale;
  std::vector<int> ids = o.criteria;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  for (int id : ids)
    if (id < 1 || id > kCriterionCount) throw ConfigError("criterion ids are 1.." + std::to_string(kCriterionCount));
  bool all = true;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, a);
    std::cout << format_result(r) << std::endl;
    all = all && r.passed;
  }
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv) {
  CLI::App app{"Asynchronous bi-static sensing simulator"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON experiment configuration");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--methods", o.methods, "prop_sub,prop_cov,simil,evlp,ifft,synchronized")->delimiter(',');
  app.add_option("--trials", o.trials, "trials per sweep point");
  app.add_option("--snr", o.snr, "SNR list, dB")->delimiter(',');
  app.add_option("--dyn-prop", o.dyn_prop, "dynamic power proportion list")->delimiter(',');
  app.add_option("--tau-sep", o.tau_sep, "target separation list, m")->delimiter(',');
  app.add_option("--workers", o.workers, "worker threads (default: ASCSENSE_WORKERS or config)");
  app.add_flag("--check", o.check, "run the acceptance suite after the command");
  app.add_flag("-v,--verbose", o.verbose, "print per-point summaries");

  auto* simulate = app.add_subcommand("simulate", "write the CSI dump of one scenario")->fallthrough();
  simulate->add_option("--point", o.point, "sweep point index");
  simulate->add_option("--trial", o.trial, "trial index");
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over SNR / dynamic proportion")->fallthrough();
  auto* resolve = app.add_subcommand("resolve", "two-target resolution study")->fallthrough();
  auto* calibrate = app.add_subcommand("calibrate", "bidirectional reference acquisition")->fallthrough();
  calibrate->add_option("--point", o.point, "sweep point index");
  calibrate->add_option("--trial", o.trial, "trial index");
  auto* replay = app.add_subcommand("replay", "run the pipeline on a CSI dump")->fallthrough();
  replay->add_option("--csi", o.csi, "CSI dump")->required();
  replay->add_option("--reference", o.reference, "reference blob (default: derived from the dump)");
  replay->add_option("--method", o.method, "pipeline method");
  auto* check = app.add_subcommand("check", "acceptance suite")->fallthrough();
  check->add_option("--criteria", o.criteria, "criterion ids")->delimiter(',');
  check->add_option("--trial-scale", o.trial_scale, "scale Monte Carlo trial counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    int rc = kExitOk;
    if (simulate->parsed()) rc = cmd_simulate(o);
    else if (sweep->parsed()) rc = cmd_sweep(o, false);
    else if (resolve->parsed()) rc = cmd_sweep(o, true);
    else if (calibrate->parsed()) rc = cmd_calibrate(o);
    else if (replay->parsed()) rc = cmd_replay(o);
    else if (check->parsed()) return cmd_check(o);
    if (rc == kExitOk && o.check) rc = cmd_check(o);
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == Errc::io) return kExitMissingFile;
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace ascsense::cli
