"""Bayesian model switching under misspecification: equilibria, robustness verdicts, simulation."""

import json

from . import _misbelief
from ._misbelief import ConfigError

__all__ = [
    "ConfigError",
    "scenario_names",
    "scenario_summary",
    "scenario",
    "run_scenario",
    "equilibria",
    "verdict",
    "simulate",
    "multi_model_gate",
    "investment_thresholds",
]


def _params(params):
    return json.dumps(params) if params else ""


def scenario_names():
    return list(_misbelief.scenario_names())


def scenario_summary(name):
    return _misbelief.scenario_summary(name)


def scenario(name, params=None):
    """Scenario as a JSON-compatible dict (a builtin name or a path to a scenario file)."""
    return json.loads(_misbelief.scenario_json(name, _params(params)))


def run_scenario(name, params=None, threads=1, seed=None):
    """Run the scenario's expected assertions; returns one dict per assertion."""
    return list(_misbelief.run_assertions(name, _params(params), threads, seed))


def equilibria(name, params=None, grid=20, paths=1000, horizon=1000, seed=1, threads=1, family=""):
    return json.loads(_misbelief.equilibria(name, _params(params), grid, paths, horizon, seed, threads, family))


def verdict(name, params=None, mode="global", family="", assume_convergence=False, paths=1000, horizon=1000,
            seed=1, threads=1):
    return json.loads(_misbelief.verdict(name, _params(params), mode, family, assume_convergence, paths, horizon,
                                         seed, threads))


def simulate(name, models=None, params=None, paths=1000, horizon=1000, seed=1, threads=1, alpha=None):
    """Monte Carlo of the switcher; returns (summary dict, list of per-path dicts, warning or None)."""
    summary, runs, warning = _misbelief.simulate(name, _params(params), list(models or []), paths, horizon, seed,
                                                 threads, alpha)
    return json.loads(summary), list(runs), warning


def multi_model_gate(alpha, k, d=None):
    return _misbelief.multi_model_gate(alpha, k, d)


def investment_thresholds(params=None):
    return _misbelief.investment_thresholds(_params(params))
