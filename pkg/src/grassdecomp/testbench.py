"""Synthetic instances, error metrics and parameter sweeps."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .decompose import STEPS, DecomposeOptions, Decomposition, grassmann_decompose
from .errors import GrassmannError, InvalidSubspaceError
from .skew import SkewTensor


@dataclass
class ErrorReport:
    backward_error: float
    forward_error: float
    matching: list[int]
    timings: dict = field(default_factory=dict)


def random_decomposition(d: int, m: int, r: int, field: str = "real", seed=0):
    """Gaussian rank-``r`` instance normalized to unit Frobenius norm.

    Columns inside each block are rescaled to the geometric mean of the
    block's column norms; the global normalization lands in the coefficients.
    """
    if d * r > m:
        raise ValueError(f"need d*r <= m, got {d}*{r} > {m}")
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((r, m, d))
    if field == "complex":
        V = V + 1j * rng.standard_normal((r, m, d))
    norms = np.linalg.norm(V, axis=1)  # (r, d)
    target = np.exp(np.log(norms).mean(axis=1, keepdims=True))
    V = V * (target / norms)[:, None, :]
    D = Decomposition(V, np.ones(r))
    T = D.evaluate()
    scale = 1.0 / T.norm()
    D = Decomposition(V, np.full(r, scale))
    return D, T * scale


def add_noise(T: SkewTensor, sigma: float, seed=0) -> SkewTensor:
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return T
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(T.coords.shape)
    if T.field == "complex":
        g = g + 1j * rng.standard_normal(T.coords.shape)
    return SkewTensor(T.coords + sigma * g / np.linalg.norm(g), T.n, T.d)


def _orthonormal(U: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    Q, R = np.linalg.qr(U)
    diag = np.abs(np.diag(R))
    if diag.size < U.shape[1] or diag.max() == 0 or diag.min() <= tol * diag.max():
        raise InvalidSubspaceError("basis is numerically rank deficient")
    return Q


def chordal_distance(U: np.ndarray, W: np.ndarray) -> float:
    """``||U U^H - W W^H||_F / sqrt(2)`` for the spans of ``U`` and ``W``.

    Evaluated as ``||(I - U U^H) W||_F``, which is exact for equal dimensions
    and keeps full relative accuracy for tiny distances.
    """
    Qu, Qw = _orthonormal(np.asarray(U)), _orthonormal(np.asarray(W))
    return float(np.linalg.norm(Qw - Qu @ (Qu.conj().T @ Qw)))


def match_components(truth: Decomposition, computed: Decomposition) -> list[int]:
    """``matching[i]`` is the computed term aligned with truth term ``i``."""
    r = truth.r
    Qt = [_orthonormal(b) for b in truth.blocks]
    Qc = [_orthonormal(b) for b in computed.blocks]
    P = np.array([[abs(np.linalg.det(a.conj().T @ b)) for b in Qc] for a in Qt])
    best = np.argmax(P, axis=0)  # truth index for each computed column
    if len(set(best.tolist())) == r:
        matching = [0] * r
        for j, i in enumerate(best):
            matching[i] = j
        return matching
    order = np.argsort(-P, axis=None, kind="stable")
    matching = [-1] * r
    taken = set()
    for flat in order:
        i, j = divmod(int(flat), r)
        if matching[i] < 0 and j not in taken:
            matching[i] = j
            taken.add(j)
    return matching


def backward_error(T: SkewTensor, D: Decomposition) -> float:
    diff = np.linalg.norm(D.evaluate().coords - T.coords)
    nrm = T.norm()
    return float(diff / nrm) if nrm > 0 else float(diff)


def forward_error(truth: Decomposition, computed: Decomposition, matching=None) -> float:
    if matching is None:
        matching = match_components(truth, computed)
    return max(chordal_distance(truth.blocks[i], computed.blocks[j]) for i, j in enumerate(matching))


def error_report(T: SkewTensor, truth: Decomposition, computed: Decomposition) -> ErrorReport:
    matching = match_components(truth, computed)
    return ErrorReport(
        backward_error(T, computed),
        forward_error(truth, computed, matching),
        matching,
        dict(computed.info.get("timings", {})),
    )


# -- sweeps -----------------------------------------------------------------

SWEEP_DEFAULTS = {
    "refine": dict(d=3, r=5, m=20, field="real", trials=20, ps=(0, 1, 2, 4, 8)),
    "noise": dict(d=3, r=3, m=12, field="complex", trials=10, sigmas=(1e-12, 1e-10, 1e-8, 1e-6)),
    "grid": dict(ds=(3, 4), rs=(1, 2, 3), field="real", trials=1, max_coords=10**5, max_gram=10**4),
    "timing": dict(ds=(3, 4), n=12, extra=1, field="real", trials=1),
}

BASE_COLUMNS = ["suite", "trial", "d", "m", "r", "field", "p", "sigma",
                "backward_error", "forward_error", "ok", "error"]
TIMING_COLUMNS = [f"t_{s}" for s in STEPS] + ["t_total"]


def trial_seeds(seed: int, trial: int) -> tuple[int, int, int]:
    """Independent (instance, noise, algorithm) seeds for one trial."""
    a, b, c = np.random.SeedSequence([seed, trial]).generate_state(3)
    return int(a), int(b), int(c)


def _run_trial(suite, trial, d, m, r, fld, p, sigma, seed, timings):
    s_gen, s_noise, s_alg = trial_seeds(seed, trial)
    row = dict(suite=suite, trial=trial, d=d, m=m, r=r, field=fld, p=p, sigma=sigma,
               backward_error="", forward_error="", ok=False, error="")
    truth, T = random_decomposition(d, m, r, fld, s_gen)
    T_noisy = add_noise(T, sigma, s_noise)
    try:
        t0 = time.perf_counter()
        D = grassmann_decompose(T_noisy, DecomposeOptions(rank=r, p=p, seed=s_alg))
        total = time.perf_counter() - t0
    except GrassmannError as exc:
        row["error"] = type(exc).__name__
        return row
    rep = error_report(T_noisy, truth, D)
    row.update(backward_error=rep.backward_error, forward_error=rep.forward_error, ok=True)
    if timings:
        for s in STEPS:
            row[f"t_{s}"] = rep.timings.get(s, 0.0)
        row["t_total"] = total
    return row


def run_sweep(kind: str, params: dict | None = None, seed: int = 0, timings: bool | None = None) -> list[dict]:
    """One row per trial; failed trials are kept with ``ok=False``."""
    if kind not in SWEEP_DEFAULTS:
        raise ValueError(f"unknown sweep {kind!r}")
    prm = {**SWEEP_DEFAULTS[kind], **(params or {})}
    if timings is None:
        timings = kind == "timing"
    rows = []
    if kind == "refine":
        for t in range(prm["trials"]):
            for p in prm["ps"]:
                rows.append(_run_trial(kind, t, prm["d"], prm["m"], prm["r"], prm["field"], p, 0.0, seed, timings))
    elif kind == "noise":
        trial = 0
        for sigma in prm["sigmas"]:
            for _ in range(prm["trials"]):
                rows.append(_run_trial(kind, trial, prm["d"], prm["m"], prm["r"], prm["field"], 10, sigma, seed, timings))
                trial += 1
    elif kind == "grid":
        trial = 0
        for d in prm["ds"]:
            for r in prm["rs"]:
                n = d * r
                if comb(n, d) > prm["max_coords"] or n * n > prm["max_gram"]:
                    continue
                for _ in range(prm["trials"]):
                    rows.append(_run_trial(kind, trial, d, n, r, prm["field"], 10, 0.0, seed, timings))
                    trial += 1
    else:  # timing
        trial = 0
        for d in prm["ds"]:
            r = prm["n"] // d
            for _ in range(prm["trials"]):
                rows.append(_run_trial(kind, trial, d, prm["n"] + prm["extra"], r, prm["field"], 10, 0.0, seed, timings))
                trial += 1
    return rows


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[dict], timings: bool = False) -> str:
    cols = BASE_COLUMNS + (TIMING_COLUMNS if timings else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(row.get(c, "")) for c in cols])
    return buf.getvalue()
