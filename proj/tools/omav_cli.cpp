#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "omav/config.hpp"
#include "omav/errors.hpp"
#include "omav/telemetry.hpp"

namespace fs = std::filesystem;
using namespace omav;

namespace {

enum Exit { kOk = 0, kConfig = 1, kSingular = 2, kNoConverge = 3, kInternal = 4 };

constexpr double kDeg = std::numbers::pi / 180.0;

// --out wins, then OMAV_OUTPUT_DIR, then the config
std::string output_dir(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("OMAV_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct EquilibriumArgs {
  std::vector<double> rpy{0, 0, 0};
  std::vector<double> pos{0, 0, 0};
  int pjd = 2;
  std::string out;
};

int cmd_equilibrium(const EquilibriumArgs& a) {
  RobotParams p;
  p.pjd = a.pjd == 1 ? Pjd::One : Pjd::Two;
  const Pose C = make_pose(from_euler_xyz(Vec3(a.rpy[0], a.rpy[1], a.rpy[2]) * kDeg),
                           Vec3(a.pos[0], a.pos[1], a.pos[2]));
  const EquilibriumSolution sol = solve_equilibrium(C, p);
  nlohmann::json j = equilibrium_json(sol, p, C);
  j["rpy_deg"] = a.rpy;
  j["position"] = a.pos;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  std::string path = a.out;
  if (path.empty()) {
    if (const char* env = std::getenv("OMAV_OUTPUT_DIR"); env && *env) {
      fs::create_directories(env);
      path = (fs::path(env) / "equilibrium.json").string();
    }
  }
  if (!path.empty()) write_text_file(path, text);
  return kOk;
}

struct SimulateArgs {
  std::string config;
  bool no_noise = false;
  bool no_perturb = false;
  int pjd = 0;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = 0;
  double duration = 0.0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  Config cfg = load_config(a.config);
  Scenario& sc = cfg.scenario;
  if (a.no_noise) sc.noise = false;
  if (a.no_perturb) sc.perturbation = 0.0;
  if (a.pjd) sc.params.pjd = a.pjd == 1 ? Pjd::One : Pjd::Two;
  if (a.duration > 0.0) sc.duration = a.duration;
  if (!a.seeds.empty()) cfg.seeds = a.seeds;

  const fs::path dir = output_dir(a.out, cfg.output_dir);
  fs::create_directories(dir);

  const std::size_t n = cfg.seeds.size();
  std::vector<RunSummary> summaries(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        Scenario run = sc;
        run.seed = cfg.seeds[i];
        const RunResult res = run_scenario(run);
        const std::string stem = cfg.name + "_seed" + std::to_string(run.seed);
        std::ostringstream csv;
        write_telemetry_csv(csv, res.records);
        write_text_file((dir / (stem + ".csv")).string(), csv.str());
        write_text_file((dir / (stem + ".json")).string(), summary_json(res.summary).dump(2) + "\n");
        summaries[i] = res.summary;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(a.jobs ? a.jobs : std::thread::hardware_concurrency(),
                                                        static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  nlohmann::json agg;
  agg["name"] = cfg.name;
  agg["pjd"] = static_cast<int>(sc.params.pjd);
  agg["noise"] = sc.noise;
  agg["perturbation"] = sc.perturbation;
  agg["runs"] = nlohmann::json::array();
  int code = kOk;
  for (const RunSummary& s : summaries) {
    agg["runs"].push_back(summary_json(s));
    if (!s.completed) {
      const bool singular = s.abort_reason.rfind("singularity", 0) == 0;
      code = std::max<int>(code, singular ? kSingular : kInternal);
      std::cerr << "seed " << s.seed << " aborted: " << s.abort_reason << "\n";
    }
  }
  agg["phase_medians"] = nlohmann::json::array();
  for (std::size_t ph = 0; ph < sc.schedule.size(); ++ph) {
    std::vector<double> ep, ea, sf;
    for (const RunSummary& s : summaries) {
      if (ph >= s.phases.size()) continue;
      ep.push_back(s.phases[ph].mean_e_p_last5);
      ea.push_back(s.phases[ph].mean_e_phi_last5);
      sf.push_back(s.phases[ph].mean_sum_f_last5);
    }
    if (ep.empty()) break;
    agg["phase_medians"].push_back({{"t_start", sc.schedule[ph].t_start},
                                    {"mean_e_p_last5", median(ep)},
                                    {"mean_e_phi_last5", median(ea)},
                                    {"mean_sum_f_last5", median(sf)}});
  }
  write_text_file((dir / (cfg.name + "_summary.json")).string(), agg.dump(2) + "\n");
  std::cout << agg["phase_medians"].dump(2) << "\n";
  return code;
}

int cmd_zero_dynamics(const std::string& config, const std::string& out) {
  const Config cfg = load_config(config);
  if (!cfg.zero_dynamics) throw ConfigError(config + ": missing [zero_dynamics] table");
  const ZeroDynamicsSetup& zd = *cfg.zero_dynamics;
  const ZeroDynamicsResult res = run_zero_dynamics(zd.C, zd.q, zd.qd, cfg.scenario.params,
                                                   zd.duration, zd.dt, zd.sample_rate);
  const fs::path dir = output_dir(out, cfg.output_dir);
  fs::create_directories(dir);
  std::ostringstream csv;
  write_zero_dynamics_csv(csv, res.records);
  write_text_file((dir / (cfg.name + ".csv")).string(), csv.str());
  const std::string summary = zero_dynamics_json(res).dump(2) + "\n";
  write_text_file((dir / (cfg.name + ".json")).string(), summary);
  std::cout << summary;
  if (!res.completed) {
    std::cerr << "zero-dynamics run aborted: " << res.abort_reason << "\n";
    return kInternal;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"omav: multirotor with passive propeller links"};
  app.require_subcommand(1);

  EquilibriumArgs eq;
  auto* equi = app.add_subcommand("equilibrium", "static equilibrium at a base pose");
  equi->add_option("--rpy", eq.rpy, "XYZ Euler angles in degrees")->expected(3);
  equi->add_option("--pos", eq.pos, "base position in m")->expected(3);
  equi->add_option("--pjd", eq.pjd, "passive joint design")->check(CLI::IsMember({1, 2}));
  equi->add_option("--out", eq.out, "also write the JSON report here");

  SimulateArgs sim;
  auto* simc = app.add_subcommand("simulate", "closed-loop run from a TOML config");
  simc->add_option("config", sim.config)->required()->check(CLI::ExistingFile);
  simc->add_flag("--no-noise", sim.no_noise);
  simc->add_flag("--no-perturb", sim.no_perturb);
  simc->add_option("--pjd", sim.pjd)->check(CLI::IsMember({1, 2}));
  simc->add_option("--seed", sim.seeds, "override the seed list");
  simc->add_option("--jobs", sim.jobs, "parallel runs (default: hardware threads)");
  simc->add_option("--duration", sim.duration, "override the run length in s");
  simc->add_option("--out", sim.out, "output directory");

  std::string zd_config, zd_out;
  auto* zdc = app.add_subcommand("zero-dynamics", "passive-joint motion with the base held at rest");
  zdc->add_option("config", zd_config)->required()->check(CLI::ExistingFile);
  zdc->add_option("--out", zd_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*equi) return cmd_equilibrium(eq);
    if (*simc) return cmd_simulate(sim);
    if (*zdc) return cmd_zero_dynamics(zd_config, zd_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const SingularityError& e) {
    std::cerr << "singularity: " << e.what() << "\n";
    return kSingular;
  } catch (const NonConvergence& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kNoConverge;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
