#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "misbelief/errors.hpp"
#include "misbelief/json_io.hpp"
#include "misbelief/scenarios.hpp"

using namespace misbelief;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string scenario;
  std::vector<std::string> params;  // key=value, value parsed as JSON when possible
  std::optional<std::size_t> paths, horizon;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::size_t grid = 20;
  double eps = 0.05;
  std::vector<double> d = {1.0, 0.5, 2.0};
  bool assume_convergence = false;
  std::size_t threads = 1;
  std::string out = ".";
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("MISBELIEF_SEED")) {
    try {
      std::size_t pos = 0;
      auto v = std::stoull(env, &pos);
      if (pos == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("MISBELIEF_SEED is not an unsigned integer: ") + env);
  }
  return 1;
}

json builder_params(const std::vector<std::string>& kv) {
  json p = json::object();
  for (const auto& item : kv) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got " + item);
    std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    json v = json::parse(value, nullptr, false);
    p[key] = v.is_discarded() ? json(value) : v;
  }
  return p;
}

Scenario load(const Common& c) {
  if (c.scenario.empty()) throw ConfigError("--scenario is required");
  Scenario s = load_scenario(c.scenario, builder_params(c.params));
  if (c.alpha) {
    if (!(*c.alpha > 1.0)) throw ConfigError("--alpha must exceed 1");
    s.alpha = *c.alpha;
  }
  return s;
}

fs::path out_dir(const Common& c) {
  fs::path p(c.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw ConfigError("output directory not writable: " + c.out);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
  if (!f) throw ConfigError("cannot write " + p.string());
}

VerdictOptions verdict_options(const Common& c, const Scenario& s) {
  VerdictOptions vo;
  vo.budget.paths = c.paths.value_or(1000);
  vo.budget.horizon = c.horizon.value_or(1000);
  if (vo.budget.paths < 1 || vo.budget.horizon < 1) throw ConfigError("--paths and --horizon must be at least 1");
  vo.budget.seed = resolve_seed(c);
  vo.budget.eps = c.eps;
  vo.budget.threads = c.threads;
  vo.mixed_resolution = c.grid;
  vo.d_candidates = c.d;
  auto it = s.priors.find(s.models.at(0).id());
  if (it != s.priors.end()) vo.prior = it->second;
  return vo;
}

int cmd_equilibria(const Common& c, const std::string& family) {
  Scenario s = load(c);
  const auto& model = s.models.at(0);
  VerdictOptions vo = verdict_options(c, s);
  auto an = analyze_equilibria(s.problem, model, c.grid);
  auto finish = [&](std::vector<EquilibriumRecord>& recs) {
    json arr = json::array();
    for (auto& r : recs) {
      if (r.sce) r = estimate_p_absorbing(s.problem, model, std::move(r), vo.budget);
      if (!family.empty()) {
        const auto& f = s.family(family);
        r = check_local_dominance(s.problem, f, model, std::move(r), std::nullopt, c.d);
        r = check_locally_kl_minimizing(s.problem, f, model, std::move(r));
      }
      arr.push_back(io::to_json(s.problem, r));
    }
    return arr;
  };
  json j;
  j["scenario"] = s.name;
  j["model"] = model.id();
  j["pure"] = finish(an.pure);
  j["mixed"] = finish(an.mixed);
  j["sce"] = finish(an.sce);
  j["sce_exists"] = !an.sce.empty();
  auto path = out_dir(c) / "equilibria.json";
  write_file(path, io::dump(j) + "\n");
  std::cout << "pure BN-E: " << an.pure.size() << ", mixed components: " << an.mixed.size()
            << ", SCE supports: " << an.sce.size() << "\nwrote " << path.string() << "\n";
  return 0;
}

int cmd_robustness(const Common& c, const std::string& mode, const std::string& family) {
  Scenario s = load(c);
  const auto& model = s.models.at(0);
  VerdictOptions vo = verdict_options(c, s);
  Verdict v;
  if (mode == "global") {
    v = global_verdict(s.problem, model, vo);
  } else if (mode == "unconstrained") {
    v = unconstrained_local_verdict(s.problem, model, vo);
  } else if (mode == "constrained") {
    if (family.empty()) throw ConfigError("--family is required for constrained verdicts");
    v = constrained_verdict(s.problem, s.family(family), model, c.assume_convergence, vo);
  } else {
    throw ConfigError("--mode must be global, unconstrained or constrained");
  }
  json j = io::to_json(s.problem, v);
  j["scenario"] = s.name;
  j["mode"] = mode;
  auto path = out_dir(c) / "verdict.json";
  write_file(path, io::dump(j) + "\n");
  std::cout << to_string(v.kind) << " (" << to_string(v.certainty) << ")";
  if (!v.basis.empty()) std::cout << " via " << v.basis.front();
  std::cout << "\n";
  for (const auto& w : v.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

std::string csv_labels(const DecisionProblem& p, const std::vector<std::size_t>& acts) {
  std::string s;
  for (std::size_t i = 0; i < acts.size(); ++i) s += (i ? ";" : "") + p.actions[acts[i]].label;
  return s;
}

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int cmd_simulate(const Common& c, std::vector<std::string> models, std::size_t thin, std::size_t window) {
  Scenario s = load(c);
  if (models.empty()) models = {s.models.at(0).id()};
  std::size_t paths = c.paths.value_or(1000), horizon = c.horizon.value_or(1000);
  if (paths < 1 || horizon < 1) throw ConfigError("--paths and --horizon must be at least 1");
  auto cfg = make_switcher(s, models);
  if (auto w = multi_model_warning(cfg)) std::cerr << "warning: " << *w << "\n";
  RunOptions ro;
  ro.horizon = horizon;
  ro.window = window;
  ro.trajectory_thin = thin;
  std::uint64_t seed = resolve_seed(c);
  auto res = monte_carlo(cfg, paths, ro, seed, c.threads);
  auto dir = out_dir(c);
  json j = io::to_json(res.summary);
  j["scenario"] = s.name;
  j["alpha"] = cfg.alpha;
  write_file(dir / "summary.json", io::dump(j) + "\n");
  std::ostringstream runs;
  runs << "path_id,n_switches,final_model,persist_proxy,absorbed_actions,cumulative_utility\n";
  for (const auto& p : res.paths)
    runs << p.path_id << ',' << p.switches.size() << ',' << cfg.models[p.final_model].id() << ','
         << (p.persist_proxy ? 1 : 0) << ',' << csv_labels(cfg.problem, p.absorbed_into) << ','
         << num17(p.cumulative_utility) << '\n';
  write_file(dir / "runs.csv", runs.str());
  if (thin > 0) {
    std::ostringstream tr;
    tr << "path_id,t,model,action,outcome,cumulative_utility\n";
    for (const auto& p : res.paths)
      for (const auto& r : p.trajectory)
        tr << p.path_id << ',' << r.t << ',' << cfg.models[r.model].id() << ',' << cfg.problem.actions[r.action].label
           << ',' << num17(r.outcome) << ',' << num17(r.cumulative_utility) << '\n';
    write_file(dir / "trajectories.csv", tr.str());
  }
  const auto& sm = res.summary;
  std::cout << "paths " << sm.paths << ", switched " << sm.switched_paths << ", persist_proxy " << sm.persist_count
            << " (" << sm.persist_frequency << ", Wilson [" << sm.persist_wilson.lo << ", " << sm.persist_wilson.hi
            << "])\nwrote " << (dir / "summary.json").string() << ", " << (dir / "runs.csv").string() << "\n";
  return 0;
}

int cmd_scenario_list() {
  for (const auto& n : scenario_names()) std::cout << n << "  " << scenario_summary(n) << "\n";
  return 0;
}

int cmd_scenario_dump(const Common& c, const std::string& name, bool to_stdout) {
  Scenario s = load_scenario(name, builder_params(c.params));
  std::string text = io::dump(scenario_to_json(s)) + "\n";
  if (to_stdout) {
    std::cout << text;
  } else {
    auto path = out_dir(c) / (s.name + ".json");
    write_file(path, text);
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int cmd_scenario_run(const Common& c, const std::string& name) {
  Scenario s = load_scenario(name, builder_params(c.params));
  if (c.alpha) s.alpha = *c.alpha;
  AssertionOptions opt;
  opt.threads = c.threads;
  if (c.seed) opt.seed = c.seed;
  auto t0 = std::chrono::steady_clock::now();
  auto results = run_assertions(s, opt);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << " [" << r.kind << ", " << r.provenance << "] " << r.detail
              << "\n";
    failed += r.passed ? 0 : 1;
  }
  for (const auto& n : s.notes) std::cout << "note: " << n << "\n";
  std::cout << s.name << ": " << results.size() - failed << "/" << results.size() << " assertions passed in " << secs
            << " s\n";
  if (!c.out.empty() && c.out != ".") {
    json j = json::array();
    for (const auto& r : results)
      j.push_back({{"id", r.id}, {"kind", r.kind}, {"provenance", r.provenance}, {"passed", r.passed}, {"detail", r.detail}});
    write_file(out_dir(c) / "assertions.json", io::dump(j) + "\n");
  }
  return failed ? 2 : 0;
}

void add_common(CLI::App* app, Common& c, bool sim) {
  app->add_option("--scenario", c.scenario, "built-in scenario name or path to a scenario JSON file");
  app->add_option("--param", c.params, "builder parameter key=value (repeatable)");
  app->add_option("--paths", c.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
  app->add_option("--horizon", c.horizon, "Monte Carlo horizon T")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "master seed (falls back to MISBELIEF_SEED, then 1)");
  app->add_option("--alpha", c.alpha, "Bayes-factor threshold override");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory");
  if (!sim) {
    app->add_option("--grid", c.grid, "simplex grid resolution for mixed strategies");
    app->add_option("--eps", c.eps, "p-absorption epsilon");
    app->add_option("--d", c.d, "dominance exponents to try")->delimiter(',');
    app->add_flag("--assume-convergence", c.assume_convergence, "assume beliefs converge (necessity check)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"misbelief: model switching, Berk-Nash equilibria and robustness verdicts"};
  app.require_subcommand(1);
  Common c;
  std::string family, mode = "global";
  std::vector<std::string> models;
  std::size_t thin = 0, window = 0;
  std::string scen_name;
  bool to_stdout = false;

  auto* eq = app.add_subcommand("equilibria", "enumerate and classify Berk-Nash equilibria");
  add_common(eq, c, false);
  eq->add_option("--family", family, "parametric family for local checks");

  auto* rb = app.add_subcommand("robustness", "global, unconstrained-local or constrained-local verdict");
  add_common(rb, c, false);
  rb->add_option("--mode", mode, "global | unconstrained | constrained");
  rb->add_option("--family", family, "parametric family for constrained verdicts");

  auto* un = app.add_subcommand("unconstrained", "unconstrained local verdict (same as the global one)");
  add_common(un, c, false);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo of the switcher or a dogmatic modeler");
  add_common(sim, c, true);
  sim->add_option("--models", models, "model ids, initial first (default: the initial model alone)")->delimiter(',');
  sim->add_option("--trajectories", thin, "write trajectories.csv, every k-th period");
  sim->add_option("--window", window, "persistence window (default (T+1)/2)");

  auto* sc = app.add_subcommand("scenario", "list, dump or run built-in scenarios");
  sc->require_subcommand(1);
  auto* sl = sc->add_subcommand("list", "list built-in scenarios");
  auto* sd = sc->add_subcommand("dump", "write a scenario as JSON");
  sd->add_option("name", scen_name, "scenario name or JSON path")->required();
  sd->add_option("--param", c.params, "builder parameter key=value");
  sd->add_option("--out", c.out, "output directory");
  sd->add_flag("--stdout", to_stdout, "print instead of writing a file");
  auto* sr = sc->add_subcommand("run", "run a scenario's expected assertions");
  sr->add_option("name", scen_name, "scenario name or JSON path")->required();
  sr->add_option("--param", c.params, "builder parameter key=value");
  sr->add_option("--seed", c.seed, "override assertion seeds");
  sr->add_option("--alpha", c.alpha, "Bayes-factor threshold override");
  sr->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  sr->add_option("--out", c.out, "write assertions.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*eq) return cmd_equilibria(c, family);
    if (*rb) return cmd_robustness(c, mode, family);
    if (*un) return cmd_robustness(c, "unconstrained", family);
    if (*sim) return cmd_simulate(c, models, thin, window);
    if (*sl) return cmd_scenario_list();
    if (*sd) return cmd_scenario_dump(c, scen_name, to_stdout);
    if (*sr) return cmd_scenario_run(c, scen_name);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
