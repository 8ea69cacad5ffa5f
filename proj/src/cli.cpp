#include "am2r/cli.hpp"

#include "am2r/svg.hpp"
#include "am2r/version.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace am2r {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir);
}

void write_manifest(Config cfg, const std::string& command,
                    const std::string& out_dir) {
  cfg.set("meta.command", command);
  cfg.set("meta.version", kVersion);
  std::ofstream os(join(out_dir, "manifest.txt"), std::ios::binary);
  if (!os) throw std::runtime_error("cannot write manifest in " + out_dir);
  os << cfg.serialize();
}

std::uint64_t seed_of(const Config& cfg) {
  return static_cast<std::uint64_t>(cfg.integer("seed", 4000));
}

double final_cost(const EpisodeConfig& epc, const StepRecord& last) {
  const double v = epc.accuracy() ? last.eta : last.J;
  return std::log2(std::max(v, 1e-300));
}

struct SweepCell {
  double theta = 0.0;
  double rho = 0.0;
  double cost_sum = 0.0;
  int count = 0;
  int errors = 0;
};

struct SweepOutcome {
  Table cells;
  Table summary;
  double best_theta = 0.0;
  double best_rho = 0.0;
  double best_cost = 0.0;
  bool have_best = false;
};

std::vector<std::pair<std::string, EpisodeConfig>> sweep_problems(
    const Config& cfg, const EpisodeConfig& base) {
  std::vector<std::pair<std::string, EpisodeConfig>> out;
  if (cfg.has("sweep.omegas_pi")) {
    for (double w : parse_list(cfg.str("sweep.omegas_pi"))) {
      EpisodeConfig epc = base;
      epc.problem = ProblemDistribution::of(make_pacman_corner(w * kPi));
      out.emplace_back(epc.problem.fixed->id, epc);
    }
    return out;
  }
  if (!base.problem.fixed)
    throw std::runtime_error(
        "sweep needs a fixed problem or sweep.omegas_pi; a draw "
        "distribution has no enumerable cells");
  out.emplace_back(base.problem.fixed->id, base);
  return out;
}

SweepOutcome run_sweep(const Config& cfg, const EpisodeConfig& base,
                       std::uint64_t seed) {
  const bool hp = base.hp();
  std::vector<double> thetas =
      cfg.has("sweep.thetas")
          ? parse_list(cfg.str("sweep.thetas"))
          : std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> rhos;
  if (hp)
    rhos = cfg.has("sweep.rhos")
               ? parse_list(cfg.str("sweep.rhos"))
               : std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4,
                                     0.5, 0.6, 0.7, 0.8, 0.9};
  else
    rhos = {std::nan("")};
  const auto problems = sweep_problems(cfg, base);

  SweepOutcome out{
      Table({"theta", "rho", "problem_id", "final_eta", "final_J", "steps",
             "done_reason"}),
      Table({"theta", "rho", "mean_cost", "cells", "errors"})};
  std::vector<SweepCell> grid;
  for (double theta : thetas) {
    for (double rho : rhos) {
      SweepCell cell;
      cell.theta = theta;
      cell.rho = rho;
      for (const auto& [pid, epc] : problems) {
        try {
          const auto tr = run_fixed(
              epc, seed, theta,
              hp ? std::optional<double>(rho) : std::nullopt);
          const auto& last = tr.back();
          out.cells.add_row({format_double(theta), format_double(rho), pid,
                             format_double(last.eta), format_double(last.J),
                             format_int(last.k), last.done_reason});
          cell.cost_sum += final_cost(epc, last);
          ++cell.count;
        } catch (const std::exception& ex) {
          out.cells.add_row({format_double(theta), format_double(rho), pid,
                             "nan", "nan", "0", "error"});
          std::cerr << "sweep cell theta=" << format_double(theta)
                    << " rho=" << format_double(rho) << " problem=" << pid
                    << " failed: " << ex.what() << '\n';
          ++cell.errors;
        }
      }
      grid.push_back(cell);
    }
  }
  for (const auto& cell : grid) {
    const double mean =
        cell.count ? cell.cost_sum / cell.count
                   : std::numeric_limits<double>::quiet_NaN();
    out.summary.add_row({format_double(cell.theta), format_double(cell.rho),
                         format_double(mean), format_int(cell.count),
                         format_int(cell.errors)});
    if (cell.count && (!out.have_best || mean < out.best_cost)) {
      out.have_best = true;
      out.best_cost = mean;
      out.best_theta = cell.theta;
      out.best_rho = cell.rho;
    }
  }
  if (!out.have_best) throw std::runtime_error("sweep: every cell failed");
  return out;
}

Table read_table_checked(const std::string& path,
                         const std::vector<std::string>& need) {
  Table t = Table::read_file(path);
  for (const auto& col : need)
    if (t.col_index(col) < 0)
      throw std::runtime_error(path + ": missing column " + col);
  return t;
}

bool all_nan_column(const Table& t, const std::string& col) {
  for (std::size_t i = 0; i < t.n_rows(); ++i)
    if (std::isfinite(t.num(i, col))) return false;
  return true;
}

}  // namespace

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(csv);
  while (std::getline(is, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    out.push_back(parse_double(item.substr(a, b - a + 1)));
  }
  if (out.empty()) throw std::runtime_error("empty list: " + csv);
  return out;
}

EpisodeConfig episode_from_config(const Config& cfg) {
  EpisodeConfig e;
  const std::string mode = cfg.str("episode.mode", "h_efficiency");
  if (mode == "h_efficiency")
    e.mode = EnvMode::HEfficiency;
  else if (mode == "h_accuracy")
    e.mode = EnvMode::HAccuracy;
  else if (mode == "hp_accuracy")
    e.mode = EnvMode::HpAccuracy;
  else
    throw std::runtime_error("unknown episode.mode: " + mode);

  const std::string prob = cfg.str("episode.problem", "lshape");
  if (prob == "square_sine")
    e.problem = ProblemDistribution::of(make_square_sine());
  else if (prob == "square_linear")
    e.problem = ProblemDistribution::of(make_square_linear());
  else if (prob == "square_saddle")
    e.problem = ProblemDistribution::of(make_square_saddle());
  else if (prob == "lshape")
    e.problem = ProblemDistribution::of(make_lshape_corner());
  else if (prob == "pacman")
    e.problem = ProblemDistribution::of(
        make_pacman_corner(cfg.num("episode.omega_pi", 0.5) * kPi));
  else if (prob == "pacman_family")
    e.problem = ProblemDistribution::pacman_uniform(
        cfg.num("episode.omega_pi_min", 0.1) * kPi,
        cfg.num("episode.omega_pi_max", 0.9) * kPi);
  else
    throw std::runtime_error("unknown episode.problem: " + prob);

  e.resolution = static_cast<int>(cfg.integer("episode.resolution", 1));
  e.order = static_cast<int>(
      cfg.integer("episode.order", e.hp() ? 2 : 1));
  e.eta_target = cfg.num("episode.eta_target", 0.0);
  e.dof_budget = cfg.num("episode.dof_budget", 0.0);
  const std::string marking = cfg.str("episode.marking", "greedy");
  if (marking == "greedy")
    e.marking = MarkingRule::Greedy;
  else if (marking == "dorfler")
    e.marking = MarkingRule::Dorfler;
  else
    throw std::runtime_error("unknown episode.marking: " + marking);
  e.max_steps = static_cast<int>(cfg.integer("episode.max_steps", 50));
  e.dof_cap = cfg.num("episode.dof_cap", 1e6);
  e.guard_penalty = cfg.num("episode.guard_penalty", -10.0);
  const std::string solver = cfg.str("episode.solver", "ldlt");
  if (solver == "ldlt")
    e.solver.method = SolverOptions::Method::Ldlt;
  else if (solver == "cg")
    e.solver.method = SolverOptions::Method::Cg;
  else
    throw std::runtime_error("unknown episode.solver: " + solver);
  e.solver.tol = cfg.num("episode.solver_tol", e.solver.tol);
  e.solver.maxit_factor =
      cfg.num("episode.solver_maxit_factor", e.solver.maxit_factor);
  e.validate();
  return e;
}

TrainerConfig trainer_from_config(const Config& cfg) {
  TrainerConfig t;
  t.batches = static_cast<int>(cfg.integer("trainer.batches", t.batches));
  t.batch_size =
      static_cast<int>(cfg.integer("trainer.batch_size", t.batch_size));
  t.fragment = static_cast<int>(cfg.integer("trainer.fragment", t.fragment));
  t.workers = static_cast<int>(cfg.integer("trainer.workers", t.workers));
  t.minibatch =
      static_cast<int>(cfg.integer("trainer.minibatch", t.minibatch));
  t.epochs = static_cast<int>(cfg.integer("trainer.epochs", t.epochs));
  t.lr = cfg.num("trainer.lr", t.lr);
  t.value_lr = cfg.num("trainer.value_lr", t.value_lr);
  t.clip = cfg.num("trainer.clip", t.clip);
  t.vf_coef = cfg.num("trainer.vf_coef", t.vf_coef);
  t.ent_coef = cfg.num("trainer.ent_coef", t.ent_coef);
  t.gamma = cfg.num("trainer.gamma", t.gamma);
  t.gae_lambda = cfg.num("trainer.gae_lambda", t.gae_lambda);
  t.normalize_adv = cfg.flag("trainer.normalize_adv", t.normalize_adv);
  t.seed = seed_of(cfg);
  t.validate();
  return t;
}

int cmd_sweep(Config cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_manifest(cfg, "sweep", out_dir);
  const EpisodeConfig base = episode_from_config(cfg);
  const SweepOutcome sw = run_sweep(cfg, base, seed_of(cfg));
  sw.cells.write_file(join(out_dir, "sweep.csv"));
  sw.summary.write_file(join(out_dir, "sweep_summary.csv"));
  std::cout << "sweep best theta=" << format_double(sw.best_theta);
  if (base.hp()) std::cout << " rho=" << format_double(sw.best_rho);
  std::cout << " mean_cost=" << format_double(sw.best_cost) << '\n';
  return 0;
}

int cmd_train(Config cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_manifest(cfg, "train", out_dir);
  const EpisodeConfig epc = episode_from_config(cfg);
  const TrainerConfig tc = trainer_from_config(cfg);
  const EnvFactory factory = [epc](int, std::uint64_t s) {
    return std::make_unique<AmrEnv>(epc, s);
  };
  const TrainResult res =
      train_ppo(factory, epc.hp() ? 2 : 1, tc, &std::cerr);
  write_checkpoint(join(out_dir, "checkpoint.txt"),
                   {res.policy, res.value, tc});
  training_log_table(res.log).write_file(join(out_dir, "training_log.csv"));
  std::cout << "train wrote checkpoint.txt and training_log.csv ("
            << res.log.size() << " batches)\n";
  return 0;
}

int cmd_deploy(Config cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_manifest(cfg, "deploy", out_dir);
  const Checkpoint ck = read_checkpoint(cfg.str("deploy.checkpoint"));
  const EpisodeConfig epc = episode_from_config(cfg);
  if ((epc.hp() ? 2 : 1) != ck.policy.action_dim())
    throw std::runtime_error(
        "checkpoint action dimension does not match episode.mode");
  const int episodes =
      static_cast<int>(cfg.integer("deploy.episodes", 1));
  const bool deterministic = cfg.flag("deploy.deterministic", true);
  const std::uint64_t seed = seed_of(cfg);
  for (int i = 0; i < episodes; ++i) {
    TriMesh mesh;
    const auto tr = deploy_policy(ck.policy, epc,
                                  seed + static_cast<std::uint64_t>(i),
                                  deterministic, &mesh);
    char name[64];
    std::snprintf(name, sizeof name, "transcript_%03d.csv", i);
    transcript_table(tr).write_file(join(out_dir, name));
    std::snprintf(name, sizeof name, "mesh_%03d.txt", i);
    write_snapshot_file(mesh, join(out_dir, name));
  }
  std::cout << "deploy wrote " << episodes << " transcript(s)\n";
  return 0;
}

int cmd_compare(Config cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_manifest(cfg, "compare", out_dir);
  const Checkpoint ck = read_checkpoint(
      cfg.str("compare.checkpoint", cfg.str("deploy.checkpoint", "")));
  const EpisodeConfig base = episode_from_config(cfg);
  if ((base.hp() ? 2 : 1) != ck.policy.action_dim())
    throw std::runtime_error(
        "checkpoint action dimension does not match episode.mode");
  const std::uint64_t seed = seed_of(cfg);
  const bool deterministic = cfg.flag("compare.deterministic", true);

  std::vector<std::pair<std::string, EpisodeConfig>> problems;
  if (cfg.has("compare.omegas_pi")) {
    for (double w : parse_list(cfg.str("compare.omegas_pi"))) {
      EpisodeConfig epc = base;
      epc.problem = ProblemDistribution::of(make_pacman_corner(w * kPi));
      problems.emplace_back(epc.problem.fixed->id, epc);
    }
  } else if (base.problem.fixed) {
    problems.emplace_back(base.problem.fixed->id, base);
  } else {
    throw std::runtime_error("compare needs fixed problems");
  }

  double theta_b, rho_b = std::nan("");
  if (cfg.has("compare.baseline_theta")) {
    theta_b = cfg.num("compare.baseline_theta", 0.5);
    if (base.hp()) rho_b = cfg.num("compare.baseline_rho", 0.5);
  } else {
    Config sweep_cfg = cfg;
    if (cfg.has("compare.omegas_pi"))
      sweep_cfg.set("sweep.omegas_pi", cfg.str("compare.omegas_pi"));
    const SweepOutcome sw = run_sweep(sweep_cfg, base, seed);
    sw.cells.write_file(join(out_dir, "baseline_sweep.csv"));
    sw.summary.write_file(join(out_dir, "baseline_sweep_summary.csv"));
    theta_b = sw.best_theta;
    rho_b = base.hp() ? sw.best_rho : std::nan("");
  }

  Table out({"problem_id", "theta_baseline", "rho_baseline", "final_baseline",
             "final_policy", "factor", "exponent"});
  for (const auto& [pid, epc] : problems) {
    const auto base_tr = run_fixed(
        epc, seed, theta_b,
        epc.hp() ? std::optional<double>(rho_b) : std::nullopt);
    const auto pol_tr = deploy_policy(ck.policy, epc, seed, deterministic);
    const double vb = epc.accuracy() ? base_tr.back().eta : base_tr.back().J;
    const double vp = epc.accuracy() ? pol_tr.back().eta : pol_tr.back().J;
    const auto [factor, exponent] = improvement_metrics(vb, vp);
    out.add_row({pid, format_double(theta_b), format_double(rho_b),
                 format_double(vb), format_double(vp), format_double(factor),
                 format_double(exponent)});
  }
  out.write_file(join(out_dir, "compare.csv"));
  std::cout << "compare wrote compare.csv (" << out.n_rows() << " rows)\n";
  return 0;
}

int cmd_plot(Config cfg, const std::string& out_dir) {
  const std::string dir = cfg.str("plot.run", out_dir);
  if (!fs::is_directory(dir))
    throw std::runtime_error("plot: no such run directory: " + dir);
  ensure_dir(out_dir);

  bool accuracy_mode = true;
  {
    const std::string mpath = join(dir, "manifest.txt");
    if (fs::exists(mpath)) {
      const Config manifest = Config::parse_file(mpath);
      accuracy_mode =
          manifest.str("episode.mode", "h_accuracy") != "h_efficiency";
    }
  }

  int plotted = 0;
  const std::string tl = join(dir, "training_log.csv");
  if (fs::exists(tl)) {
    try {
      const Table t = read_table_checked(tl, {"batch", "mean_cost"});
      Series cost;
      cost.label = "mean episode cost";
      for (std::size_t i = 0; i < t.n_rows(); ++i) {
        cost.x.push_back(t.num(i, "batch"));
        cost.y.push_back(t.num(i, "mean_cost"));
      }
      PlotOptions opt;
      opt.title = "training curve";
      opt.xlabel = "batch";
      opt.ylabel = "mean episode cost";
      write_svg_file(join(out_dir, "training_curve.svg"),
                     line_plot_svg({cost}, opt));
      ++plotted;
    } catch (const std::exception& ex) {
      std::cerr << "plot: skipping training curve: " << ex.what() << '\n';
    }
  }

  std::vector<std::string> transcripts;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("transcript", 0) == 0 &&
        name.size() > 4 && name.substr(name.size() - 4) == ".csv")
      transcripts.push_back(name);
  }
  std::sort(transcripts.begin(), transcripts.end());
  for (const auto& name : transcripts) {
    const std::string stem = name.substr(0, name.size() - 4);
    try {
      const Table t = read_table_checked(
          join(dir, name),
          {"k", "theta", "rho", "ndofs", "J_k", "eta_k", "s1", "s2"});
      Series eta_dofs{"estimate", {}, {}}, eta_cum{"estimate", {}, {}};
      Series th{"theta", {}, {}}, rh{"rho", {}, {}};
      Series s1{"s1", {}, {}}, s2{"s2", {}, {}};
      for (std::size_t i = 0; i < t.n_rows(); ++i) {
        eta_dofs.x.push_back(t.num(i, "ndofs"));
        eta_dofs.y.push_back(t.num(i, "eta_k"));
        eta_cum.x.push_back(t.num(i, "J_k"));
        eta_cum.y.push_back(t.num(i, "eta_k"));
        th.x.push_back(t.num(i, "k"));
        th.y.push_back(t.num(i, "theta"));
        rh.x.push_back(t.num(i, "k"));
        rh.y.push_back(t.num(i, "rho"));
        s1.x.push_back(t.num(i, "k"));
        s1.y.push_back(t.num(i, "s1"));
        s2.x.push_back(t.num(i, "k"));
        s2.y.push_back(t.num(i, "s2"));
      }
      PlotOptions opt;
      opt.logx = true;
      opt.logy = true;
      opt.title = stem;
      opt.xlabel = "ndofs";
      opt.ylabel = "error estimate";
      write_svg_file(join(out_dir, stem + "_eta_dofs.svg"),
                     line_plot_svg({eta_dofs}, opt));
      opt.xlabel = "cumulative dofs";
      write_svg_file(join(out_dir, stem + "_eta_cumdofs.svg"),
                     line_plot_svg({eta_cum}, opt));
      PlotOptions aopt;
      aopt.title = stem;
      aopt.xlabel = "step";
      aopt.ylabel = "action";
      std::vector<Series> actions{th};
      bool any_rho = false;
      for (double v : rh.y)
        if (std::isfinite(v)) any_rho = true;
      if (any_rho) actions.push_back(rh);
      write_svg_file(join(out_dir, stem + "_actions.svg"),
                     line_plot_svg(actions, aopt));
      PlotOptions sopt;
      sopt.title = stem;
      sopt.xlabel = "step";
      sopt.ylabel = "statistic";
      write_svg_file(join(out_dir, stem + "_stats.svg"),
                     line_plot_svg({s1, s2}, sopt));
      ++plotted;
    } catch (const std::exception& ex) {
      std::cerr << "plot: skipping " << name << ": " << ex.what() << '\n';
    }
  }

  const std::string sw = join(dir, "sweep.csv");
  if (fs::exists(sw)) {
    try {
      const Table t = read_table_checked(
          sw, {"theta", "rho", "final_eta", "final_J", "done_reason"});
      auto cost_of = [&](std::size_t i) {
        const double v =
            accuracy_mode ? t.num(i, "final_eta") : t.num(i, "final_J");
        return std::log2(std::max(v, 1e-300));
      };
      const bool hp = !all_nan_column(t, "rho");
      std::map<std::pair<double, double>, std::pair<double, int>> agg;
      std::map<double, std::vector<double>> by_theta;
      for (std::size_t i = 0; i < t.n_rows(); ++i) {
        if (t.cell(i, "done_reason") == "error") continue;
        const double th = t.num(i, "theta");
        const double rh = hp ? t.num(i, "rho") : 0.0;
        const double c = cost_of(i);
        auto& slot = agg[{th, rh}];
        slot.first += c;
        slot.second += 1;
        by_theta[th].push_back(c);
      }
      if (hp) {
        std::map<double, int> xi, ri;
        for (const auto& [key, val] : agg) {
          (void)val;
          xi.emplace(key.first, 0);
          ri.emplace(key.second, 0);
        }
        int n = 0;
        for (auto& [k, v] : xi) v = n++;
        n = 0;
        for (auto& [k, v] : ri) v = n++;
        std::vector<double> xs, ys;
        for (const auto& [k, v] : xi) xs.push_back(k);
        for (const auto& [k, v] : ri) ys.push_back(k);
        std::vector<double> grid(xs.size() * ys.size(),
                                 std::numeric_limits<double>::quiet_NaN());
        for (const auto& [key, val] : agg) {
          const std::size_t cy = static_cast<std::size_t>(ri.at(key.second));
          grid[cy * xs.size() + xi.at(key.first)] = val.first / val.second;
        }
        PlotOptions opt;
        opt.title = "sweep landscape (mean final cost)";
        opt.xlabel = "theta";
        opt.ylabel = "rho";
        write_svg_file(join(out_dir, "sweep_landscape.svg"),
                       heat_grid_svg(xs, ys, grid, opt));
      } else {
        Series curve{"mean final cost", {}, {}};
        for (const auto& [key, val] : agg) {
          curve.x.push_back(key.first);
          curve.y.push_back(val.first / val.second);
        }
        PlotOptions opt;
        opt.title = "sweep";
        opt.xlabel = "theta";
        opt.ylabel = "final cost (log2)";
        write_svg_file(join(out_dir, "sweep_curve.svg"),
                       line_plot_svg({curve}, opt));
      }
      std::vector<std::pair<std::string, std::vector<double>>> groups;
      for (const auto& [th, vals] : by_theta)
        groups.emplace_back(format_double(th), vals);
      PlotOptions lopt;
      lopt.title = "final cost by theta";
      lopt.ylabel = "final cost (log2)";
      write_svg_file(join(out_dir, "sweep_letter_values.svg"),
                     letter_value_svg(groups, lopt));
      ++plotted;
    } catch (const std::exception& ex) {
      std::cerr << "plot: skipping sweep: " << ex.what() << '\n';
    }
  }

  const std::string cp = join(dir, "compare.csv");
  if (fs::exists(cp)) {
    try {
      const Table t = read_table_checked(cp, {"problem_id", "factor"});
      Series f{"improvement factor", {}, {}};
      for (std::size_t i = 0; i < t.n_rows(); ++i) {
        f.x.push_back(static_cast<double>(i));
        f.y.push_back(t.num(i, "factor"));
      }
      Series one{"parity", f.x, std::vector<double>(f.x.size(), 1.0)};
      PlotOptions opt;
      opt.title = "policy vs baseline";
      opt.xlabel = "problem index";
      opt.ylabel = "improvement factor";
      write_svg_file(join(out_dir, "compare_factors.svg"),
                     line_plot_svg({f, one}, opt));
      ++plotted;
    } catch (const std::exception& ex) {
      std::cerr << "plot: skipping compare: " << ex.what() << '\n';
    }
  }

  if (plotted == 0)
    throw std::runtime_error("plot: nothing to plot in " + dir);
  std::cout << "plot wrote " << plotted << " figure group(s)\n";
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"benchmark harness for policy-driven adaptive mesh refinement"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out = "am2r_out";
    long long seed = 0;
    std::vector<std::string> overrides;
  };
  std::map<std::string, Args> args;
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> blurbs = {
      {"sweep", "run fixed-parameter episodes over a theta/rho grid"},
      {"train", "train a marking policy and write a checkpoint"},
      {"deploy", "run a trained policy and write transcripts"},
      {"compare", "policy vs best fixed baseline on a problem list"},
      {"plot", "render figures from a run directory"}};
  for (const auto& [name, blurb] : blurbs) {
    CLI::App* sub = app.add_subcommand(name, blurb);
    auto& a = args[name];
    sub->add_option("--config", a.config, "configuration file")->required();
    sub->add_option("--seed", a.seed, "seed override");
    sub->add_option("--out", a.out, "output directory");
    sub->add_option("overrides", a.overrides, "key=value overrides");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const auto& a = args.at(name);
      Config cfg = Config::parse_file(a.config);
      for (const auto& ov : a.overrides) cfg.apply_override(ov);
      if (sub->count("--seed")) cfg.set("seed", std::to_string(a.seed));
      if (!cfg.has("seed")) cfg.set("seed", "4000");
      if (name == "sweep") return cmd_sweep(std::move(cfg), a.out);
      if (name == "train") return cmd_train(std::move(cfg), a.out);
      if (name == "deploy") return cmd_deploy(std::move(cfg), a.out);
      if (name == "compare") return cmd_compare(std::move(cfg), a.out);
      return cmd_plot(std::move(cfg), a.out);
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}

}  // namespace am2r
