"""Nonlocal Schroedinger operators: spectra, exit times and bound checks.

Specs and domains are plain dicts in the same JSON schema as the CLI configs, e.g.
``{"kind": "stable", "alpha": 1.0}`` and ``{"type": "interval", "a": -1, "b": 1}``.
"""

import json

from . import _core
from ._core import NlxError, ParameterDomainError, UsageError, mittag_leffler, theta_kappa

__all__ = [
    "NlxError",
    "ParameterDomainError",
    "UsageError",
    "theta",
    "theta_kappa",
    "eval_psi",
    "invert_psi",
    "mittag_leffler",
    "laplace_transform",
    "exit_moment",
    "survival",
    "eigensolve",
    "torsion",
    "heat_kernel",
    "run_experiment",
]


def _j(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def theta(scan_lo=1.0, scan_hi=40.0):
    """Return (theta, kappa_star, F(-1))."""
    return _core.theta(scan_lo, scan_hi)


def eval_psi(spec, u):
    return _core.eval_psi(_j(spec), u)


def invert_psi(spec, v):
    return _core.invert_psi(_j(spec), v)


def laplace_transform(spec, u, t, n=100_000, seed=1):
    """Monte Carlo E[exp(-u S_t)] as a dict with mean, stderr, n, seed."""
    return json.loads(_core.laplace_transform(_j(spec), u, t, n, seed))


def exit_moment(spec, domain, x0, p=1.0, dt=1e-3, horizon=10.0, n_paths=10_000, seed=1, workers=0):
    return json.loads(_core.exit_moment(_j(spec), _j(domain), list(x0), p, dt, horizon, n_paths, seed, workers))


def survival(spec, domain, x0, t, dt=1e-3, horizon=10.0, n_paths=10_000, seed=1, workers=0):
    return json.loads(_core.survival(_j(spec), _j(domain), list(x0), t, dt, horizon, n_paths, seed, workers))


def eigensolve(spec, domain, n_per_axis=256, embed_factor=4.0, k=1):
    """Lowest k eigenpairs; returns {"h", "points", "pairs": [{"lambda", "phi", "x_star", ...}]}."""
    return _core.eigensolve(_j(spec), _j(domain), n_per_axis, embed_factor, k)


def torsion(spec, domain, n_per_axis=256):
    return _core.torsion(_j(spec), _j(domain), n_per_axis)


def heat_kernel(spec, domain, n_per_axis, t):
    return _core.heat_kernel(_j(spec), _j(domain), n_per_axis, t)


def run_experiment(config):
    """Run one experiment config (dict or JSON text); returns exit_code, reports and summary."""
    return json.loads(_core.run_experiment(_j(config)))
