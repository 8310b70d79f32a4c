"""Auction solvers for WGS exchange markets, spending-restricted Fisher
markets and Nash social welfare, backed by the C++ core.

Instances, reports and results are plain dicts in the same JSON layout the
``wgs-auction`` command line tool reads and writes.
"""

import json

from . import _core
from ._core import (
    EXIT_CERTIFIED,
    EXIT_FAILED,
    EXIT_NO_EQUILIBRIUM,
    EXIT_USAGE,
    price_value,
)

__all__ = [
    "EXIT_CERTIFIED",
    "EXIT_FAILED",
    "EXIT_NO_EQUILIBRIUM",
    "EXIT_USAGE",
    "demand",
    "price_value",
    "property_suite",
    "solve_exchange",
    "solve_nsw",
    "solve_sr",
    "verify",
]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def solve_exchange(instance, eps=None, fnp="auto", dummy_eta=0.0, max_exponent=0, audit=False):
    """Run the exchange auction; the result carries ``exit_code`` and ``verification``."""
    return json.loads(_core.solve_exchange(_text(instance), eps, fnp, dummy_eta, max_exponent, audit))


def solve_sr(instance, eps=None, fnp="auto", init=None, price_cap=0.0, audit=False):
    """Run the spending-restricted auction."""
    return json.loads(_core.solve_sr(_text(instance), eps, fnp, init, price_cap, audit))


def solve_nsw(instance, eps=None, brute_force=False, audit=False):
    """Approximate Nash social welfare allocation of whole copies."""
    return json.loads(_core.solve_nsw(_text(instance), eps, brute_force, audit))


def verify(instance, report, eps, weak_clearing=False):
    """Certify a report against an exchange or spending-restricted instance."""
    return json.loads(_core.verify(_text(instance), _text(report), eps, weak_clearing))


def demand(spec, prices, budget):
    """Demand bundle of one agent at the given prices and budget."""
    return _core.demand(_text(spec), list(prices), budget)


def property_suite(family, trials=1000, seed=1):
    """Randomized demand-system property checks for one family."""
    return json.loads(_core.property_suite(family, trials, seed))
