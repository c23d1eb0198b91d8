"""Shared test utilities: random ledgers and an exhaustive likelihood oracle."""

import numpy as np

from echospread.exposure import ExposureLedger
from echospread.virality import Boundary, mle_virality


def random_ledger(rng, max_exposed=20, min_max_alpha=0.3, require_failures=False):
    """Random exposure ledger with activities uniform on (0, 1].

    Redraws until the largest trial activity is at least min_max_alpha,
    which caps r_max at 1/min_max_alpha and keeps the 1e-5 grid oracle
    tractable.
    """
    while True:
        n_e = int(rng.integers(1, max_exposed + 1))
        lo = 1 if require_failures else 0
        if require_failures and n_e < 2:
            continue
        n_f = int(rng.integers(lo, n_e))
        n_s = n_e - n_f
        if n_s == 0:
            continue
        alphas = 1.0 - rng.random(n_e)
        if alphas.max() < min_max_alpha:
            continue
        successes = [f"s{i}" for i in range(n_s)]
        failures = [f"f{i}" for i in range(n_f)]
        act = dict(zip(successes + failures, alphas.tolist()))
        ledger = ExposureLedger(
            tweet_id="t",
            origin_author="auth",
            group=0,
            exposed=frozenset(successes + failures),
            successes=frozenset(successes),
            failures=frozenset(failures),
            unexposed_successes=frozenset(),
        )
        return ledger, act


def interior_random_ledger(rng, max_exposed=20):
    """Random ledger whose MLE is interior (resampled until it is)."""
    while True:
        ledger, act = random_ledger(rng, max_exposed, require_failures=True)
        if mle_virality(ledger, act).boundary is Boundary.INTERIOR:
            return ledger, act


def _loglik_on_grid(rs, n_success, alphas_f):
    vals = n_success * np.log(rs)
    if alphas_f.size:
        margin = 1.0 - np.outer(alphas_f, rs)
        bad = (margin <= 0.0).any(axis=0)
        safe = np.where(margin > 0.0, margin, 1.0)
        vals = vals + np.where(bad, -np.inf, np.log(safe).sum(axis=0))
    return vals


def grid_oracle(ledger, act, step=1e-5, coarsen=100):
    """Argmax of the cascade log-likelihood over the grid {k*step}.

    Exhaustive coarse scan every `coarsen` grid points, then an exhaustive
    fine scan of the straddling window; by strict concavity this returns
    the same point as a full scan. Set coarsen=1 for the naive full scan.
    """
    n_s = len(ledger.successes)
    alphas_f = np.array(sorted(act[w] for w in ledger.failures))
    alpha_max = max(act[u] for u in ledger.exposed)
    top = int(np.floor(1.0 / alpha_max / step))
    idx = np.arange(1, top + 1, coarsen)
    if idx[-1] != top:
        idx = np.append(idx, top)
    vals = _loglik_on_grid(idx * step, n_s, alphas_f)
    k0 = idx[int(np.argmax(vals))]
    if coarsen == 1:
        return k0 * step
    lo = max(1, k0 - coarsen)
    hi = min(top, k0 + coarsen)
    window = np.arange(lo, hi + 1)
    vals = _loglik_on_grid(window * step, n_s, alphas_f)
    return window[int(np.argmax(vals))] * step
