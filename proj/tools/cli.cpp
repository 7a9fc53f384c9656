#include "cli.hpp"

#include "dysonlab/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <sstream>

namespace dyson::cli {

namespace fs = std::filesystem;

namespace {

struct Run {
  ScenarioConfig cfg;
  std::string config_path;
  fs::path out;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
  json errors = json::array();
  std::mutex mu;

  std::string file(const std::string& name) {
    std::lock_guard<std::mutex> lock(mu);
    artifacts.push_back(name);
    return (out / name).string();
  }
  void error(const std::string& where, const std::string& what) {
    std::lock_guard<std::mutex> lock(mu);
    errors.push_back(json{{"where", where}, {"message", what}});
  }
  const ModelSpec& model() const {
    if (!cfg.model) throw ConfigError("config has no model block");
    return *cfg.model;
  }
};

void record_profile_errors(Run& run, const DensityProfile& p, const std::string& label) {
  for (std::size_t i = 0; i < p.taus.size(); ++i)
    if (!p.errors[i].empty()) run.error(label + " tau=" + format_double(p.taus[i]), p.errors[i]);
}

DensityProfile grid_scan(Run& run, const ModelSpec& spec, const std::string& label) {
  const GridConfig& g = run.cfg.grid;
  DensityProfile p = scan(spec, g.lo, g.hi, g.points, run.cfg.solver, run.jobs);
  record_profile_errors(run, p, label);
  return p;
}

void cmd_solve(Run& run) {
  const ModelSpec& spec = run.model();
  std::vector<cplx> pts = run.cfg.solve.points;
  if (pts.empty()) pts.push_back(cplx(0.0, 1.0));
  json sols = json::array();
  for (cplx z : pts) sols.push_back(to_json(solve_at(spec, z, run.cfg.solver)));
  write_json(run.file("solution.json"), sols.size() == 1 ? sols[0] : sols);
}

void cmd_scan(Run& run) {
  const ModelSpec& spec = run.model();
  DensityProfile p = grid_scan(run, spec, "scan");
  write_profile_csv(run.file("profile.csv"), p);
  BandStructure bs = band_structure(spec, p, run.cfg.solver);
  json j = to_json(bs);
  try {
    j["total_mass"] = total_mass(spec, p);
  } catch (const DomainError& e) {
    j["total_mass"] = nullptr;
    j["total_mass_error"] = e.what();
  }
  j["failures"] = p.failures();
  write_json(run.file("scan.json"), j);
}

void cmd_classify(Run& run) {
  const ModelSpec& spec = run.model();
  DensityProfile p = grid_scan(run, spec, "classify");
  write_profile_csv(run.file("profile.csv"), p);
  BandStructure bs = band_structure(spec, p, run.cfg.solver);
  const GridConfig& g = run.cfg.grid;
  std::vector<double> cand;
  for (const auto& b : bs.bands)
    for (double e : {b.first, b.second})
      if (e != g.lo && e != g.hi) cand.push_back(e);
  for (const auto& m : bs.minima) cand.push_back(m.tau);
  if (run.cfg.classify.positive_only)
    cand.erase(std::remove_if(cand.begin(), cand.end(), [](double t) { return t < 0; }), cand.end());
  std::sort(cand.begin(), cand.end());

  std::vector<std::optional<SingularityReport>> reports(cand.size());
  parallel_for(static_cast<int>(cand.size()), run.jobs, [&](int i) {
    try {
      reports[i] = classify(spec, bs, cand[i], run.cfg.solver, run.cfg.classify.options);
    } catch (const Error& e) {
      run.error("classify tau=" + format_double(cand[i]), e.what());
    }
  });
  json list = json::array();
  for (const auto& r : reports)
    if (r) list.push_back(to_json(*r));
  write_json(run.file("singularities.json"), list);
}

void cmd_bandmass(Run& run) {
  const ModelSpec& spec = run.model();
  DensityProfile p = grid_scan(run, spec, "bandmass");
  BandStructure bs = band_structure(spec, p, run.cfg.solver);
  BandMassSummary s = band_masses(spec, bs, p, run.cfg.solver);
  json j = to_json(s);
  j["n"] = spec.dim();
  write_json(run.file("bandmass.json"), j);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void cmd_mc(Run& run) {
  const McConfig& mc = run.cfg.mc;
  if (!run.cfg.model) throw ConfigError("mc: config has no model block");
  json runs = json::array();
  json medians = json::object();
  json first;
  for (int N : mc.sizes) {
    EnsembleSpec ens = parse_ensemble(run.cfg.model_source, N, run.seed, mc.law);
    ModelSpec spec = ens.model();
    DensityProfile p = grid_scan(run, spec, "mc N=" + std::to_string(N));
    std::vector<std::optional<Comparison>> cmp(mc.draws);
    std::vector<std::vector<double>> eig(mc.draws);
    parallel_for(mc.draws, run.jobs, [&](int d) {
      try {
        eig[d] = esd(sample(ens, static_cast<std::uint64_t>(d)));
        cmp[d] = compare(eig[d], p, mc.bin_width);
      } catch (const Error& e) {
        run.error("mc N=" + std::to_string(N) + " draw=" + std::to_string(d), e.what());
      }
    });
    std::vector<double> ks;
    for (int d = 0; d < mc.draws; ++d) {
      if (!eig[d].empty())
        write_values_csv(run.file("esd_N" + std::to_string(N) + "_draw" + std::to_string(d) + ".csv"),
                         "eigenvalue", eig[d]);
      if (!cmp[d]) continue;
      json r = to_json(*cmp[d]);
      r["N"] = N;
      r["draw"] = d;
      r["seed"] = run.seed;
      if (first.is_null()) first = r;
      runs.push_back(r);
      ks.push_back(cmp[d]->ks);
    }
    if (!ks.empty()) medians[std::to_string(N)] = median(ks);
  }
  json j;
  j["ks"] = first.is_null() ? json(nullptr) : first["ks"];
  j["l1_hist"] = first.is_null() ? json(nullptr) : first["l1_hist"];
  j["n"] = first.is_null() ? json(nullptr) : first["n"];
  j["seed"] = run.seed;
  j["law"] = to_string(mc.law);
  j["median_ks"] = medians;
  j["runs"] = runs;
  write_json(run.file("comparison.json"), j);
}

void cmd_fig2(Run& run) {
  const Fig2Config& f = run.cfg.fig2;
  json summary = json::array();
  for (double alpha : f.alphas) {
    ModelSpec spec = build_two_component(f.delta, alpha, f.n0);
    DensityProfile p = scan(spec, 0.0, f.window, f.points, run.cfg.solver, run.jobs);
    std::ostringstream name;
    name << "fig2_alpha" << alpha << ".csv";
    std::ostringstream label;
    label << "fig2 alpha=" << alpha;
    record_profile_errors(run, p, label.str());
    write_profile_csv(run.file(name.str()), p);
    // Smallest interior density between the first and last supported grid points.
    std::size_t lo = p.taus.size(), hi = 0;
    for (std::size_t i = 0; i < p.taus.size(); ++i)
      if (p.inside[i]) lo = std::min(lo, i), hi = std::max(hi, i);
    json entry{{"alpha", alpha}, {"file", name.str()}};
    if (lo < hi) {
      std::size_t arg = lo;
      for (std::size_t i = lo; i <= hi; ++i)
        if (p.rho[i] < p.rho[arg]) arg = i;
      entry["interior_min_tau"] = p.taus[arg];
      entry["interior_min_rho"] = p.rho[arg];
    }
    summary.push_back(entry);
  }
  write_json(run.file("fig2.json"), summary);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matrix Dyson equation laboratory", "dyson-lab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config, outdir;
  int jobs = default_jobs();
  std::optional<std::uint64_t> seed;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "solve the Dyson equation at the configured points"},
      {"scan", "density profile, bands and total mass on a grid"},
      {"classify", "classify band edges and local minima of the density"},
      {"bandmass", "band masses from the real-axis boundary value"},
      {"mc", "sample the matching random-matrix ensemble and compare"},
      {"fig2", "two-component density profiles for several alphas"}};
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", outdir, "output directory");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override the Monte Carlo seed");
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  Run run;
  run.config_path = config;
  run.jobs = jobs;
  try {
    run.cfg = load_config(config);
    run.seed = seed ? *seed : run.cfg.mc.seed;
    run.out = !outdir.empty() ? fs::path(outdir)
              : !run.cfg.output_dir.empty() ? fs::path(run.cfg.output_dir)
                                            : fs::path("dyson-lab-out");
    fs::create_directories(run.out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  int code = kOk;
  std::string failure;
  try {
    if (command == "solve") cmd_solve(run);
    else if (command == "scan") cmd_scan(run);
    else if (command == "classify") cmd_classify(run);
    else if (command == "bandmass") cmd_bandmass(run);
    else if (command == "mc") cmd_mc(run);
    else cmd_fig2(run);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    failure = e.what();
    run.error(command, failure);
  }
  if (!run.errors.empty()) code = kNumericalFailure;

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest{{"tool", "dyson-lab"},
                {"version", kVersion},
                {"command", command},
                {"config", config},
                {"scenario", run.cfg.name},
                {"seed", run.seed},
                {"jobs", run.jobs},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"timings", {{"total_seconds", seconds}}},
                {"artifacts", run.artifacts},
                {"errors", run.errors},
                {"exit_code", code}};
  try {
    write_json((run.out / "manifest.json").string(), manifest);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  if (code != kOk) {
    err << command << ": " << run.errors.size() << " failure(s); see manifest.json\n";
  } else {
    out << command << ": wrote " << run.artifacts.size() << " artifact(s) to " << run.out.string() << '\n';
  }
  return code;
}

}  // namespace dyson::cli
