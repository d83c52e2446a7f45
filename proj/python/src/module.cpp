#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "misbelief/errors.hpp"
#include "misbelief/json_io.hpp"
#include "misbelief/scenarios.hpp"

namespace py = pybind11;
using namespace misbelief;
using nlohmann::json;

namespace {

json params_from(const std::string& text) {
  if (text.empty()) return json::object();
  return io::parse_text(text, "params");
}

Scenario load(const std::string& name, const std::string& params, std::optional<double> alpha) {
  Scenario s = load_scenario(name, params_from(params));
  if (alpha) {
    if (!(*alpha > 1.0)) throw ConfigError("alpha must exceed 1");
    s.alpha = *alpha;
  }
  return s;
}

VerdictOptions options_for(const Scenario& s, std::size_t paths, std::size_t horizon, std::uint64_t seed,
                           std::size_t threads, std::size_t grid) {
  if (paths < 1 || horizon < 1) throw ConfigError("paths and horizon must be at least 1");
  VerdictOptions vo;
  vo.budget.paths = paths;
  vo.budget.horizon = horizon;
  vo.budget.seed = seed;
  vo.budget.threads = threads;
  vo.mixed_resolution = grid;
  auto it = s.priors.find(s.models.at(0).id());
  if (it != s.priors.end()) vo.prior = it->second;
  return vo;
}

std::string equilibria(const std::string& name, const std::string& params, std::size_t grid, std::size_t paths,
                       std::size_t horizon, std::uint64_t seed, std::size_t threads, const std::string& family) {
  Scenario s = load(name, params, std::nullopt);
  const auto& model = s.models.at(0);
  auto vo = options_for(s, paths, horizon, seed, threads, grid);
  json j;
  {
    py::gil_scoped_release nogil;
    auto an = analyze_equilibria(s.problem, model, grid);
    auto finish = [&](std::vector<EquilibriumRecord>& recs) {
      json arr = json::array();
      for (auto& r : recs) {
        if (r.sce) r = estimate_p_absorbing(s.problem, model, std::move(r), vo.budget);
        if (!family.empty()) {
          const auto& f = s.family(family);
          r = check_local_dominance(s.problem, f, model, std::move(r));
          r = check_locally_kl_minimizing(s.problem, f, model, std::move(r));
        }
        arr.push_back(io::to_json(s.problem, r));
      }
      return arr;
    };
    j["scenario"] = s.name;
    j["model"] = model.id();
    j["pure"] = finish(an.pure);
    j["mixed"] = finish(an.mixed);
    j["sce"] = finish(an.sce);
    j["sce_exists"] = !an.sce.empty();
  }
  return io::dump(j, -1);
}

std::string verdict(const std::string& name, const std::string& params, const std::string& mode,
                    const std::string& family, bool assume_convergence, std::size_t paths, std::size_t horizon,
                    std::uint64_t seed, std::size_t threads) {
  Scenario s = load(name, params, std::nullopt);
  const auto& model = s.models.at(0);
  auto vo = options_for(s, paths, horizon, seed, threads, 20);
  Verdict v;
  {
    py::gil_scoped_release nogil;
    if (mode == "global") {
      v = global_verdict(s.problem, model, vo);
    } else if (mode == "unconstrained") {
      v = unconstrained_local_verdict(s.problem, model, vo);
    } else if (mode == "constrained") {
      if (family.empty()) throw ConfigError("a family is required for constrained verdicts");
      v = constrained_verdict(s.problem, s.family(family), model, assume_convergence, vo);
    } else {
      throw ConfigError("mode must be global, unconstrained or constrained");
    }
  }
  json j = io::to_json(s.problem, v);
  j["scenario"] = s.name;
  j["mode"] = mode;
  return io::dump(j, -1);
}

py::tuple simulate(const std::string& name, const std::string& params, std::vector<std::string> models,
                   std::size_t paths, std::size_t horizon, std::uint64_t seed, std::size_t threads,
                   std::optional<double> alpha) {
  Scenario s = load(name, params, alpha);
  if (models.empty()) models = {s.models.at(0).id()};
  if (paths < 1 || horizon < 1) throw ConfigError("paths and horizon must be at least 1");
  auto cfg = make_switcher(s, models);
  RunOptions ro;
  ro.horizon = horizon;
  MonteCarloResult res;
  {
    py::gil_scoped_release nogil;
    res = monte_carlo(cfg, paths, ro, seed, threads);
  }
  json j = io::to_json(res.summary);
  j["scenario"] = s.name;
  j["alpha"] = cfg.alpha;
  py::list runs;
  for (const auto& p : res.paths) {
    py::list absorbed;
    for (auto a : p.absorbed_into) absorbed.append(cfg.problem.actions[a].label);
    py::dict row;
    row["path_id"] = p.path_id;
    row["n_switches"] = p.switches.size();
    row["final_model"] = cfg.models[p.final_model].id();
    row["persist_proxy"] = p.persist_proxy;
    row["absorbed_actions"] = absorbed;
    row["cumulative_utility"] = p.cumulative_utility;
    runs.append(row);
  }
  auto warning = multi_model_warning(cfg);
  return py::make_tuple(io::dump(j, -1), runs, warning ? py::cast(*warning) : py::none());
}

py::list assertions(const std::string& name, const std::string& params, std::size_t threads,
                    std::optional<std::uint64_t> seed) {
  Scenario s = load(name, params, std::nullopt);
  AssertionOptions opt;
  opt.threads = threads;
  opt.seed = seed;
  std::vector<AssertionResult> results;
  {
    py::gil_scoped_release nogil;
    results = run_assertions(s, opt);
  }
  py::list out;
  for (const auto& r : results) {
    py::dict d;
    d["id"] = r.id;
    d["kind"] = r.kind;
    d["provenance"] = r.provenance;
    d["passed"] = r.passed;
    d["detail"] = r.detail;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_misbelief, m) {
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::invalid_argument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("scenario_names", &scenario_names);
  m.def("scenario_summary", &scenario_summary, py::arg("name"));
  m.def(
      "scenario_json",
      [](const std::string& name, const std::string& params) {
        return io::dump(scenario_to_json(load_scenario(name, params_from(params))), -1);
      },
      py::arg("name"), py::arg("params") = "");
  m.def("run_assertions", &assertions, py::arg("name"), py::arg("params") = "", py::arg("threads") = 1,
        py::arg("seed") = py::none());
  m.def("equilibria", &equilibria, py::arg("name"), py::arg("params") = "", py::arg("grid") = 20,
        py::arg("paths") = 1000, py::arg("horizon") = 1000, py::arg("seed") = 1, py::arg("threads") = 1,
        py::arg("family") = "");
  m.def("verdict", &verdict, py::arg("name"), py::arg("params") = "", py::arg("mode") = "global",
        py::arg("family") = "", py::arg("assume_convergence") = false, py::arg("paths") = 1000,
        py::arg("horizon") = 1000, py::arg("seed") = 1, py::arg("threads") = 1);
  m.def("simulate", &simulate, py::arg("name"), py::arg("params") = "", py::arg("models") = std::vector<std::string>{},
        py::arg("paths") = 1000, py::arg("horizon") = 1000, py::arg("seed") = 1, py::arg("threads") = 1,
        py::arg("alpha") = py::none());
  m.def(
      "multi_model_gate",
      [](double alpha, double k, std::optional<double> d) {
        auto g = multi_model_gate(alpha, k, d);
        return py::make_tuple(g.global_ok, g.constrained_ok);
      },
      py::arg("alpha"), py::arg("k"), py::arg("d") = py::none());
  m.def(
      "investment_thresholds",
      [](const std::string& params) {
        auto t = investment_thresholds(params_from(params));
        return py::make_tuple(t.beta_low, t.beta_high);
      },
      py::arg("params") = "");
}
