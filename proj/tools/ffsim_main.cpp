// ffsim command-line front end.
//
//   ffsim sweep  --seed N [--config F | --config-json F] [--out DIR] [--plane P]
//                [--feedforward on|off] [--infinite-statistics]
//   ffsim tomo   COUNTS.csv --dim 2|4 [--target NAME] [--out DIR]
//   ffsim timing [--config F | --config-json F] [--out DIR]
//   ffsim counts --seed N --dim 2|4 --state NAME [--counts N] [--noise M] [--config F]
//
// Exit codes: 0 success, 1 runtime error, 2 config/input error, 3 infeasible.

#include "ffsim/config.hpp"
#include "ffsim/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

using namespace ffsim;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;

struct ConfigFlags {
  std::string ini;
  std::string json;

  void attach(CLI::App* cmd) {
    auto* a = cmd->add_option("--config", ini, "INI config file")->check(CLI::ExistingFile);
    auto* b = cmd->add_option("--config-json", json, "JSON config file")->check(CLI::ExistingFile);
    a->excludes(b);
  }

  ExperimentConfig load() const {
    if (!ini.empty()) return load_config_ini(ini);
    if (!json.empty()) return load_config_json(json);
    ExperimentConfig cfg;
    cfg.validate();
    return cfg;
  }
};

std::optional<PureState2> single_qubit_named(const std::string& name) {
  if (name == "H") return PureState2::H();
  if (name == "V") return PureState2::V();
  if (name == "D") return PureState2::D();
  if (name == "A") return PureState2::A();
  if (name == "R") return PureState2::R();
  if (name == "L") return PureState2::L();
  return std::nullopt;
}

// Pure target vector for --target / --state names.
Eigen::VectorXcd named_vector(const std::string& name, int dim) {
  if (dim == 2) {
    if (auto s = single_qubit_named(name)) return s->vector();
  } else if (name == "singlet" || name == "psi-") {
    return singlet_vector();
  }
  throw InputError("unknown state '" + name + "' for dim " + std::to_string(dim) +
                   " (use H, V, D, A, R, L or singlet)");
}

int cmd_sweep(const ConfigFlags& flags, std::uint64_t seed, const std::string& out_dir,
              const std::string& plane, const std::string& feedforward, bool infinite) {
  ExperimentConfig cfg = flags.load();
  SweepSpec spec = cfg.sweep_spec();
  spec.seed = seed;
  if (!plane.empty()) spec.plane = parse_plane(plane);
  if (!feedforward.empty()) spec.feedforward = feedforward == "on";
  if (infinite) spec.infinite_statistics = true;
  spec.validate();

  const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir);
  std::filesystem::create_directories(dir);

  const SweepResult result = sweep_bloch(spec);
  std::ostringstream csv;
  write_sweep_csv(csv, result);
  const std::string stem = sweep_file_stem(spec.plane, spec.feedforward);
  write_file_atomic(dir / (stem + ".csv"), csv.str());
  write_file_atomic(dir / (stem + ".json"), sweep_to_json(result, spec).dump(2) + "\n");

  std::cout << "plane " << to_string(spec.plane) << ", feed-forward " << (spec.feedforward ? "on" : "off")
            << ", " << result.points.size() << " points\n"
            << "mean fidelity   " << format_fixed(result.mean_fidelity()) << '\n'
            << "fidelity spread " << format_fixed(result.fidelity_spread()) << '\n'
            << "wrote " << (dir / (stem + ".csv")).string() << '\n';
  return kExitOk;
}

int cmd_tomo(const std::string& counts_path, int dim, const std::string& target, const std::string& out_dir) {
  const CountsFile file = read_counts_csv(std::filesystem::path(counts_path));
  if (file.dim != dim) {
    throw InputError(counts_path + ": file holds dim-" + std::to_string(file.dim) +
                     " records but --dim " + std::to_string(dim) + " was given");
  }
  std::vector<TomographySetting> settings;
  for (const auto& r : file.records) settings.push_back(r.setting);
  const TomographyResult result = ls_reconstruct(settings, estimate_probs(file.records), dim);

  nlohmann::json report = tomography_to_json(result);
  std::cout << "purity     " << format_fixed(purity(result.rho)) << '\n'
            << "residual   " << result.residual << '\n'
            << "converged  " << (result.converged ? "yes" : "no") << '\n';
  if (result.ill_conditioned) std::cout << "warning: measurement matrix is ill-conditioned\n";
  if (!target.empty()) {
    const double f = fidelity_pure(result.rho, named_vector(target, dim));
    report["target"] = target;
    report["fidelity"] = f;
    std::cout << "fidelity   " << format_fixed(f) << " (target " << target << ")\n";
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / "tomography.json";
    write_file_atomic(path, report.dump(2) + "\n");
    std::cout << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_timing(const ConfigFlags& flags, const std::string& out_dir) {
  const ExperimentConfig cfg = flags.load();
  const TimingReport report = timing_report(cfg.timing, cfg.switch_model);
  std::cout << format_timing_table(cfg.timing, report) << '\n' << format_loss_table(cfg.losses);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_file_atomic(std::filesystem::path(out_dir) / "timing.json",
                      timing_to_json(cfg.timing, report, cfg.losses).dump(2) + "\n");
  }
  return report.feasible ? kExitOk : kExitInfeasible;
}

int cmd_counts(const ConfigFlags& flags, std::uint64_t seed, int dim, const std::string& state,
               std::uint64_t counts, const std::string& noise) {
  if (counts == 0) throw InputError("--counts must be > 0");
  DensityMatrix rho = DensityMatrix::maximally_mixed(dim);
  if (state == "source") {
    if (dim != 4) throw InputError("--state source needs --dim 4");
    rho = make_state(flags.load().source);
  } else {
    rho = DensityMatrix::pure(named_vector(state, dim));
  }
  const auto settings = dim == 2 ? single_qubit_suite() : two_qubit_suite();
  const NoiseModel model = noise == "poisson" ? NoiseModel::poisson : NoiseModel::multinomial;
  const auto records = sample_counts(settings, probabilities_from_state(rho, settings), counts, seed, model);
  write_counts_csv(std::cout, records);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feed-forward remote state preparation simulator"};
  app.require_subcommand(1);

  ConfigFlags sweep_cfg, timing_cfg, counts_cfg;
  std::uint64_t seed = 0;
  std::string out_dir, plane, feedforward, counts_path, target, state, noise = "multinomial";
  bool infinite = false;
  int dim = 0;
  std::uint64_t n_counts = 40000;

  auto* sweep = app.add_subcommand("sweep", "Bloch-plane sweep; writes sweep CSV and JSON");
  sweep_cfg.attach(sweep);
  sweep->add_option("--seed", seed, "Master random seed")->required();
  sweep->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
  sweep->add_option("--plane", plane, "meridian or equatorial")
      ->check(CLI::IsMember({"meridian", "equatorial"}));
  sweep->add_option("--feedforward", feedforward, "on or off")->check(CLI::IsMember({"on", "off"}));
  sweep->add_flag("--infinite-statistics", infinite, "Exact probabilities instead of sampled counts");

  auto* tomo = app.add_subcommand("tomo", "Least-squares reconstruction from a counts CSV");
  tomo->add_option("counts", counts_path, "Counts CSV")->required()->check(CLI::ExistingFile);
  tomo->add_option("--dim", dim, "2 or 4")->required()->check(CLI::IsMember({2, 4}));
  tomo->add_option("--target", target, "Target state: H, V, D, A, R, L or singlet");
  tomo->add_option("--out", out_dir, "Output directory for tomography.json");

  auto* timing = app.add_subcommand("timing", "Timing feasibility and loss budget");
  timing_cfg.attach(timing);
  timing->add_option("--out", out_dir, "Output directory for timing.json");

  auto* counts = app.add_subcommand("counts", "Sample a counts CSV for a tomography suite to stdout");
  counts_cfg.attach(counts);
  counts->add_option("--seed", seed, "Random seed")->required();
  counts->add_option("--dim", dim, "2 or 4")->required()->check(CLI::IsMember({2, 4}));
  counts->add_option("--state", state, "H, V, D, A, R, L, singlet, or source (config source model)")
      ->required();
  counts->add_option("--counts", n_counts, "Events per setting");
  counts->add_option("--noise", noise, "multinomial or poisson")
      ->check(CLI::IsMember({"multinomial", "poisson"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*sweep) return cmd_sweep(sweep_cfg, seed, out_dir, plane, feedforward, infinite);
    if (*tomo) return cmd_tomo(counts_path, dim, target, out_dir);
    if (*timing) return cmd_timing(timing_cfg, out_dir);
    if (*counts) return cmd_counts(counts_cfg, seed, dim, state, n_counts, noise);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
