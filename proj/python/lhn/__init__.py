"""Python front end for the lhn library.

Keys, ciphertexts and reports are plain dicts in the same JSON layout the
``lhn`` command-line tool writes to disk.
"""

import json

from . import _lhn
from ._lhn import (
    AssumptionFailure,
    BackendMismatch,
    BudgetExceeded,
    ConstructionError,
    Error,
    KeygenError,
    Refusal,
    SchemaError,
)

__all__ = [
    "gen_params", "keygen", "encrypt", "decrypt", "add", "attack", "bench_edlp", "run",
    "Error", "SchemaError", "BackendMismatch", "ConstructionError", "KeygenError",
    "AssumptionFailure", "BudgetExceeded", "Refusal",
]


def _dump(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def _orders(xs):
    return [str(x) for x in (xs or [])]


def gen_params(preset, *, seed=0, m=20, bits=0, backend="transparent",
               G=None, H=None, K=None, lam=128, generators=None):
    return json.loads(_lhn.gen_params(preset, seed, m, bits, backend, _orders(G), _orders(H),
                                      _orders(K), lam, generators))


def keygen(params, *, seed=0):
    """Returns (public key, secret key)."""
    pub, sec = _lhn.keygen(_dump(params), seed)
    return json.loads(pub), json.loads(sec)


def encrypt(pub, bit, *, seed=0):
    return json.loads(_lhn.encrypt(_dump(pub), bit, seed))


def decrypt(pub, sec, ct):
    return _lhn.decrypt(_dump(pub), _dump(sec), _dump(ct))


def add(pub, *cts):
    return json.loads(_lhn.add(_dump(pub), [_dump(c) for c in cts]))


def attack(pub, ct, *, strategy="auto", budget=None, seed=0, truth=None):
    """Returns (report, exit code). A failed attack is described in the report."""
    report, code = _lhn.attack(_dump(pub), _dump(ct), strategy, budget, seed, truth)
    return json.loads(report), code


def bench_edlp(lo, hi, *, step=2, trials=5, seed=0, bits=20):
    return json.loads(_lhn.bench_edlp(lo, hi, step, trials, seed, bits))


def run(*args):
    """Runs an lhn subcommand in-process; returns (exit code, stdout, stderr)."""
    return _lhn.run([str(a) for a in args])
