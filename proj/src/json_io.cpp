#include "misbelief/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "misbelief/errors.hpp"

namespace misbelief::io {

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write(std::ostringstream& out, const json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',';
        first = false;
        newline(depth + 1);
        out << json(it.key()).dump() << (indent < 0 ? ":" : ": ");
        write(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      out << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << (flat ? ", " : ",");
        first = false;
        if (!flat) newline(depth + 1);
        write(out, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out << ']';
      return;
    }
    case json::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

std::string sub(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string sub(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError((path.empty() ? std::string("/") : path) + ": " + msg);
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

}  // namespace

std::string dump(const json& j, int indent) {
  std::ostringstream out;
  write(out, j, indent, 0);
  return out.str();
}

json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" +
                      e.what() + ")");
  }
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing field \"" + key + "\"");
  return *it;
}

double get_double(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  fail(path, "expected a number");
}

std::size_t get_size(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
  if (j.is_number_float()) {
    double x = j.get<double>();
    if (x >= 0 && x == std::floor(x)) return static_cast<std::size_t>(x);
  }
  fail(path, "expected a nonnegative integer");
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::vector<double> get_doubles(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_double(j[i], sub(path, i)));
  return v;
}

json number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? json("nan") : json(x > 0 ? "inf" : "-inf");
}

// ----- env -----

json to_json(const OutcomeDistribution& d) {
  json j;
  switch (d.kind()) {
    case OutcomeDistribution::Kind::Categorical:
      j["type"] = "categorical";
      j["probs"] = d.probs();
      break;
    case OutcomeDistribution::Kind::Gaussian:
      j["type"] = "gaussian";
      j["mean"] = d.mean();
      j["variance"] = d.variance();
      break;
    case OutcomeDistribution::Kind::Product:
      j["type"] = "product";
      j["components"] = json::array();
      for (const auto& c : d.components()) j["components"].push_back(to_json(c));
      break;
    case OutcomeDistribution::Kind::Mixture:
      j["type"] = "mixture";
      j["weights"] = d.weights();
      j["components"] = json::array();
      for (const auto& c : d.components()) j["components"].push_back(to_json(c));
      break;
  }
  return j;
}

OutcomeDistribution distribution_from_json(const json& j, const std::string& path) {
  std::string type = get_string(require(j, "type", path), sub(path, "type"));
  auto components = [&]() {
    const auto& cs = require(j, "components", path);
    if (!cs.is_array()) fail(sub(path, "components"), "expected an array");
    std::vector<OutcomeDistribution> v;
    for (std::size_t i = 0; i < cs.size(); ++i)
      v.push_back(distribution_from_json(cs[i], sub(sub(path, "components"), i)));
    return v;
  };
  return wrap(path, [&] {
    if (type == "categorical")
      return OutcomeDistribution::categorical(get_doubles(require(j, "probs", path), sub(path, "probs")));
    if (type == "gaussian")
      return OutcomeDistribution::gaussian(get_double(require(j, "mean", path), sub(path, "mean")),
                                           get_double(require(j, "variance", path), sub(path, "variance")));
    if (type == "product") return OutcomeDistribution::product(components());
    if (type == "mixture")
      return OutcomeDistribution::mixture(get_doubles(require(j, "weights", path), sub(path, "weights")),
                                          components());
    fail(sub(path, "type"), "unknown distribution type \"" + type + "\"");
  });
}

json to_json(const UtilityFn& u) {
  json j;
  switch (u.kind()) {
    case UtilityFn::Kind::Table:
      j["type"] = "table";
      j["table"] = u.table_values();
      break;
    case UtilityFn::Kind::LinearInOutcome:
      j["type"] = "linear";
      j["coordinate"] = u.coordinate();
      j["action_cost"] = u.params();
      break;
    case UtilityFn::Kind::AbsOutcome:
      j["type"] = "abs";
      j["coordinate"] = u.coordinate();
      break;
    case UtilityFn::Kind::Custom:
      j["type"] = "custom";
      j["tag"] = u.tag();
      j["params"] = u.params();
      break;
  }
  return j;
}

UtilityFn utility_from_json(const json& j, const std::string& path) {
  std::string type = get_string(require(j, "type", path), sub(path, "type"));
  return wrap(path, [&] {
    if (type == "table") {
      const auto& t = require(j, "table", path);
      if (!t.is_array()) fail(sub(path, "table"), "expected an array of rows");
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < t.size(); ++i) rows.push_back(get_doubles(t[i], sub(sub(path, "table"), i)));
      return UtilityFn::table(rows);
    }
    if (type == "linear")
      return UtilityFn::linear(get_size(require(j, "coordinate", path), sub(path, "coordinate")),
                               get_doubles(require(j, "action_cost", path), sub(path, "action_cost")));
    if (type == "abs") {
      std::size_t c = j.contains("coordinate") ? get_size(j["coordinate"], sub(path, "coordinate")) : 0;
      return UtilityFn::abs_outcome(c);
    }
    if (type == "custom")
      return UtilityFn::custom(get_string(require(j, "tag", path), sub(path, "tag")),
                               get_doubles(require(j, "params", path), sub(path, "params")));
    fail(sub(path, "type"), "unknown utility type \"" + type + "\"");
  });
}

json to_json(const DecisionProblem& p) {
  json j;
  j["actions"] = json::array();
  for (const auto& a : p.actions) j["actions"].push_back({{"label", a.label}, {"value", a.value}});
  j["outcome_space"] = {{"kind", p.outcome_space.kind == OutcomeSpace::Kind::Categorical ? "categorical" : "real"},
                        {"size", p.outcome_space.size}};
  j["true_dgp"] = json::array();
  for (const auto& d : p.true_dgp) j["true_dgp"].push_back(to_json(d));
  j["utility"] = to_json(p.utility);
  j["discount"] = p.discount;
  return j;
}

DecisionProblem problem_from_json(const json& j, const std::string& path) {
  DecisionProblem p;
  const auto& acts = require(j, "actions", path);
  if (!acts.is_array()) fail(sub(path, "actions"), "expected an array");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    auto ap = sub(sub(path, "actions"), i);
    p.actions.push_back({get_string(require(acts[i], "label", ap), sub(ap, "label")),
                         get_double(require(acts[i], "value", ap), sub(ap, "value"))});
  }
  const auto& os = require(j, "outcome_space", path);
  auto osp = sub(path, "outcome_space");
  std::string kind = get_string(require(os, "kind", osp), sub(osp, "kind"));
  std::size_t size = get_size(require(os, "size", osp), sub(osp, "size"));
  if (kind == "categorical")
    p.outcome_space = OutcomeSpace::categorical(size);
  else if (kind == "real")
    p.outcome_space = OutcomeSpace::real(size);
  else
    fail(sub(osp, "kind"), "expected \"categorical\" or \"real\"");
  const auto& dgp = require(j, "true_dgp", path);
  if (!dgp.is_array()) fail(sub(path, "true_dgp"), "expected an array");
  for (std::size_t i = 0; i < dgp.size(); ++i)
    p.true_dgp.push_back(distribution_from_json(dgp[i], sub(sub(path, "true_dgp"), i)));
  p.utility = utility_from_json(require(j, "utility", path), sub(path, "utility"));
  p.discount = j.contains("discount") ? get_double(j["discount"], sub(path, "discount")) : 0.0;
  wrap(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

// ----- model -----

json to_json(const SubjectiveModel& m) {
  json j;
  j["id"] = m.id();
  j["parameters"] = m.parameters();
  j["kernel"] = json::array();
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    json row = json::array();
    for (std::size_t w = 0; w < m.num_params(); ++w) row.push_back(to_json(m.kernel(a, w)));
    j["kernel"].push_back(row);
  }
  return j;
}

SubjectiveModel model_from_json(const json& j, const std::string& path) {
  std::string id = get_string(require(j, "id", path), sub(path, "id"));
  const auto& ps = require(j, "parameters", path);
  if (!ps.is_array()) fail(sub(path, "parameters"), "expected an array of points");
  std::vector<Point> params;
  for (std::size_t i = 0; i < ps.size(); ++i) params.push_back(get_doubles(ps[i], sub(sub(path, "parameters"), i)));
  const auto& k = require(j, "kernel", path);
  if (!k.is_array()) fail(sub(path, "kernel"), "expected kernel[action][parameter]");
  std::vector<std::vector<OutcomeDistribution>> kernel;
  for (std::size_t a = 0; a < k.size(); ++a) {
    auto rp = sub(sub(path, "kernel"), a);
    if (!k[a].is_array()) fail(rp, "expected an array");
    std::vector<OutcomeDistribution> row;
    for (std::size_t w = 0; w < k[a].size(); ++w) row.push_back(distribution_from_json(k[a][w], sub(rp, w)));
    kernel.push_back(std::move(row));
  }
  return wrap(path, [&] { return SubjectiveModel(id, params, kernel); });
}

json to_json(const Belief& b) { return {{"model_id", b.model_id}, {"probs", b.probs}}; }

Belief belief_from_json(const json& j, const std::string& path) {
  Belief b;
  b.model_id = j.contains("model_id") ? get_string(j["model_id"], sub(path, "model_id")) : "";
  b.probs = get_doubles(require(j, "probs", path), sub(path, "probs"));
  return b;
}

namespace {

json body_to_json(const KernelBody& b) {
  json j;
  if (!b.gaussians.empty()) {
    j["gaussians"] = json::array();
    for (const auto& g : b.gaussians) j["gaussians"].push_back({{"mean", g.mean.source()}, {"variance", g.variance.source()}});
  }
  if (!b.weights.empty()) {
    j["weights"] = json::array();
    for (const auto& w : b.weights) j["weights"].push_back(w.source());
  }
  return j;
}

Expr expr_from_json(const json& j, const std::string& path) {
  if (j.is_number()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
    return Expr::parse(buf);
  }
  std::string s = get_string(j, path);
  return wrap(path, [&] { return Expr::parse(s); });
}

KernelBody body_from_json(const json& j, const std::string& path) {
  KernelBody b;
  if (j.contains("gaussians")) {
    const auto& gs = j["gaussians"];
    auto gp = sub(path, "gaussians");
    if (!gs.is_array()) fail(gp, "expected an array");
    for (std::size_t i = 0; i < gs.size(); ++i) {
      auto ip = sub(gp, i);
      b.gaussians.push_back({expr_from_json(require(gs[i], "mean", ip), sub(ip, "mean")),
                             expr_from_json(require(gs[i], "variance", ip), sub(ip, "variance"))});
    }
  }
  if (j.contains("weights")) {
    const auto& ws = j["weights"];
    if (!ws.is_array()) fail(sub(path, "weights"), "expected an array");
    for (std::size_t i = 0; i < ws.size(); ++i) b.weights.push_back(expr_from_json(ws[i], sub(sub(path, "weights"), i)));
  }
  if (b.gaussians.empty() == b.weights.empty()) fail(path, "kernel body needs exactly one of gaussians or weights");
  return b;
}

}  // namespace

json to_json(const KernelSpec& k) {
  json j = body_to_json(k.body);
  if (!k.overrides.empty()) {
    j["overrides"] = json::object();
    for (const auto& [a, b] : k.overrides) j["overrides"][std::to_string(a)] = body_to_json(b);
  }
  if (!k.bindings.empty()) {
    j["bindings"] = json::object();
    for (const auto& [name, e] : k.bindings) j["bindings"][name] = e.source();
  }
  return j;
}

KernelSpec kernel_spec_from_json(const json& j, const std::string& path) {
  KernelSpec k;
  k.body = body_from_json(j, path);
  if (j.contains("overrides")) {
    const auto& o = j["overrides"];
    if (!o.is_object()) fail(sub(path, "overrides"), "expected an object keyed by action index");
    for (auto it = o.begin(); it != o.end(); ++it) {
      std::size_t a = 0;
      try {
        a = std::stoul(it.key());
      } catch (...) {
        fail(sub(sub(path, "overrides"), it.key()), "key must be an action index");
      }
      k.overrides[a] = body_from_json(it.value(), sub(sub(path, "overrides"), it.key()));
    }
  }
  if (j.contains("bindings")) {
    const auto& b = j["bindings"];
    if (!b.is_object()) fail(sub(path, "bindings"), "expected an object");
    for (auto it = b.begin(); it != b.end(); ++it)
      k.bindings[it.key()] = expr_from_json(it.value(), sub(sub(path, "bindings"), it.key()));
  }
  return k;
}

json to_json(const QFamily& f) {
  if (!f.spec()) throw std::invalid_argument("family " + f.name() + " has no serializable kernel");
  json j;
  j["name"] = f.name();
  j["axes"] = json::array();
  for (const auto& a : f.axes()) j["axes"].push_back({{"lo", a.lo}, {"hi", a.hi}, {"step", a.step}});
  j["predicate"] = f.predicate();
  j["kernel"] = to_json(*f.spec());
  if (f.radius_given()) j["radius"] = f.default_radius();
  return j;
}

QFamily family_from_json(const json& j, const std::vector<Action>& actions, const std::string& path) {
  std::string name = get_string(require(j, "name", path), sub(path, "name"));
  const auto& ax = require(j, "axes", path);
  if (!ax.is_array()) fail(sub(path, "axes"), "expected an array");
  std::vector<GridAxis> axes;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    auto ap = sub(sub(path, "axes"), i);
    axes.push_back({get_double(require(ax[i], "lo", ap), sub(ap, "lo")),
                    get_double(require(ax[i], "hi", ap), sub(ap, "hi")),
                    get_double(require(ax[i], "step", ap), sub(ap, "step"))});
  }
  std::string predicate = j.contains("predicate") ? get_string(j["predicate"], sub(path, "predicate")) : "";
  KernelSpec spec = kernel_spec_from_json(require(j, "kernel", path), sub(path, "kernel"));
  std::optional<double> radius;
  if (j.contains("radius")) radius = get_double(j["radius"], sub(path, "radius"));
  return wrap(path, [&] { return QFamily::from_box(name, axes, predicate, spec, actions, radius); });
}

json to_json(const PolicySpec& p) {
  json j;
  j["mode"] = p.mode == PolicySpec::Mode::Myopic ? "myopic" : "grid_dp";
  j["resolution"] = p.resolution;
  if (p.discount) j["discount"] = *p.discount;
  j["quadrature_nodes"] = p.quadrature_nodes;
  return j;
}

PolicySpec policy_spec_from_json(const json& j, const std::string& path) {
  PolicySpec p;
  std::string mode = j.contains("mode") ? get_string(j["mode"], sub(path, "mode")) : "myopic";
  if (mode == "myopic")
    p.mode = PolicySpec::Mode::Myopic;
  else if (mode == "grid_dp")
    p.mode = PolicySpec::Mode::GridDP;
  else
    fail(sub(path, "mode"), "expected \"myopic\" or \"grid_dp\"");
  if (j.contains("resolution")) p.resolution = get_size(j["resolution"], sub(path, "resolution"));
  if (j.contains("discount")) p.discount = get_double(j["discount"], sub(path, "discount"));
  if (j.contains("quadrature_nodes")) p.quadrature_nodes = get_size(j["quadrature_nodes"], sub(path, "quadrature_nodes"));
  return p;
}

// ----- reports -----

json to_json(const Interval& i) { return {{"lo", i.lo}, {"hi", i.hi}}; }

json to_json(const DecisionProblem& problem, const EquilibriumRecord& r) {
  json j;
  j["strategy"] = json::object();
  for (std::size_t a = 0; a < r.sigma.probs.size(); ++a) j["strategy"][problem.actions[a].label] = r.sigma.probs[a];
  std::vector<std::string> supp;
  for (auto a : r.sigma.support()) supp.push_back(problem.actions[a].label);
  j["support"] = supp;
  j["origin"] = r.origin;
  j["kl_minimizers"] = r.kl_minimizers;
  j["supporting_beliefs"] = json::array();
  for (const auto& b : r.supporting_beliefs) j["supporting_beliefs"].push_back(to_json(b));
  j["bne"] = r.bne;
  j["bne_margin"] = number(r.bne_margin);
  j["classified"] = r.classified;
  if (r.classified) {
    j["quasi_strict"] = r.quasi_strict;
    j["quasi_strict_margin"] = number(r.quasi_strict_margin);
    j["uniformly_quasi_strict"] = r.uniformly_quasi_strict;
    j["sce"] = r.sce;
    j["uniformly_quasi_strict_sce"] = r.uniformly_quasi_strict_sce;
    j["knife_edge"] = r.knife_edge;
  }
  if (!r.members.empty()) {
    j["component_size"] = r.members.size();
    j["box_lo"] = r.box_lo;
    j["box_hi"] = r.box_hi;
  }
  if (r.exact_interval) {
    const auto& iv = *r.exact_interval;
    j["exact_interval"] = {{"action", problem.actions[0].label}, {"lo", iv.lo}, {"hi", iv.hi},
                           {"lo_closed", iv.lo_closed}, {"hi_closed", iv.hi_closed}};
  }
  const auto& pa = r.p_absorbing;
  if (pa.evaluated || pa.certified) {
    json p;
    p["certified"] = pa.certified;
    p["method"] = pa.method;
    if (pa.evaluated) {
      p["estimate"] = pa.estimate;
      p["wilson"] = to_json(pa.interval);
      p["paths"] = pa.paths;
      p["horizon"] = pa.horizon;
      p["eps"] = pa.eps;
    }
    p["positive"] = pa.positive();
    p["note"] = "Monte Carlo evidence is one-sided: a zero lower bound is not a proof of non-absorption";
    j["p_absorbing"] = p;
  }
  if (r.family) {
    const auto& f = *r.family;
    json fj;
    fj["radius"] = f.radius;
    fj["neighbors"] = f.neighbors;
    if (f.dominance_evaluated) {
      fj["locally_dominant"] = f.locally_dominant;
      if (f.passing_d) fj["passing_d"] = *f.passing_d;
      fj["tried_d"] = f.tried_d;
      fj["footnote_holds"] = f.footnote_holds;
      if (f.dominance_violation) fj["dominance_violation"] = *f.dominance_violation;
      if (!f.locally_dominant) fj["dominance_note"] = "no candidate d passed; dominance not found for these d";
    }
    if (f.kl_evaluated) {
      fj["locally_kl_minimizing"] = f.locally_kl_minimizing;
      fj["kl_witnesses"] = f.kl_witnesses;
    }
    if (!f.note.empty()) fj["note"] = f.note;
    j["family_checks"] = fj;
  }
  return j;
}

json to_json(const Evidence& e) {
  return {{"description", e.description}, {"paths", e.paths},       {"horizon", e.horizon}, {"seed", e.seed},
          {"successes", e.successes},     {"estimate", e.estimate}, {"wilson", to_json(e.wilson)}};
}

json to_json(const DecisionProblem& problem, const Verdict& v) {
  json j;
  j["kind"] = to_string(v.kind);
  j["certainty"] = to_string(v.certainty);
  j["basis"] = v.basis;
  j["witnesses"] = json::array();
  for (const auto& r : v.witnesses) j["witnesses"].push_back(to_json(problem, r));
  j["witness_points"] = v.witness_points;
  if (v.adversary) {
    j["adversary"] = {{"construction", v.adversary->construction},
                      {"model", to_json(v.adversary->model)},
                      {"prior", to_json(v.adversary->prior)}};
  }
  j["evidence"] = json::array();
  for (const auto& e : v.evidence) j["evidence"].push_back(to_json(e));
  j["warnings"] = v.warnings;
  return j;
}

json to_json(const MCSummary& s) {
  json j;
  j["paths"] = s.paths;
  j["horizon"] = s.horizon;
  j["seed"] = s.seed;
  j["model_ids"] = s.model_ids;
  j["persist_count"] = s.persist_count;
  j["persist_frequency"] = s.persist_frequency;
  j["persist_wilson"] = to_json(s.persist_wilson);
  j["switched_paths"] = s.switched_paths;
  j["switch_histogram"] = json::object();
  for (const auto& [k, n] : s.switch_histogram) j["switch_histogram"][std::to_string(k)] = n;
  j["absorption"] = s.absorption;
  j["final_model_counts"] = s.final_model_counts;
  j["mean_cumulative_utility"] = s.mean_cumulative_utility;
  auto ratio = [](const RatioSpec& r) { return json{{"numerator", r.numerator}, {"denominator", r.denominator}}; };
  j["ratio_stats"] = json::array();
  for (const auto& r : s.ratio_stats)
    j["ratio_stats"].push_back({{"ratio", ratio(r.ratio)}, {"t", r.t}, {"mean", number(r.mean)}, {"se", number(r.se)}});
  j["exceedance_stats"] = json::array();
  for (const auto& e : s.exceedance_stats)
    j["exceedance_stats"].push_back({{"ratio", ratio(e.spec.ratio)},
                                     {"threshold", e.spec.threshold},
                                     {"count", e.count},
                                     {"frequency", e.frequency},
                                     {"se", e.se},
                                     {"wilson", to_json(e.wilson)}});
  return j;
}

}  // namespace misbelief::io
