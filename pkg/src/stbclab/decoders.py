"""ML, ZF, PIC and PIC-SIC decoders over the real equivalent channel.

All decoders work on the real model y = sqrt(snr) * G @ x + noise with a
finite per-symbol PAM alphabet.  The PIC decoder handles each symbol group
independently: it projects the received vector onto the orthogonal
complement of the other groups' channel columns and jointly decodes the
group.  The PIC-SIC decoder sweeps the groups in order, projecting only the
*later* groups out and subtracting each decoded group's contribution before
moving on.

Group search modes:
  * "exhaustive" enumerates the full alphabet product of the group.
  * "conditioned" enumerates all but the first symbol and solves that pivot
    symbol in closed form (scale by the pivot column, round to the nearest
    level, clamp); it returns the same argmin and costs a factor sqrt(M)
    fewer metric evaluations.

Ties between equal metrics always resolve to the candidate earliest in
lexicographic enumeration order, which keeps every decoder deterministic.
Decoders are pure functions; counters are returned by value.
"""

from functools import lru_cache

import numpy as np
from dataclasses import dataclass

from .lindesign import RANK_EPS, RealSymbolVector

DEGENERATE_PIVOT = 1e-12
DEFAULT_ML_CAP = 1 << 20


@dataclass(frozen=True, eq=False)
class DecodeProblem:
    """One received vector with its equivalent channel, grouping and alphabets."""

    y: np.ndarray  # (2 * N_r * T,) real
    g: np.ndarray  # (2 * N_r * T, K) real equivalent channel
    scheme: object  # GroupingScheme
    alphabets: tuple  # one PamAlphabet per symbol
    snr: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if y.shape != (g.shape[0],):
            raise ValueError("received vector length must match channel rows")
        if g.shape[1] != len(self.alphabets):
            raise ValueError("need one alphabet per channel column")
        if self.scheme is not None and self.scheme.num_symbols != g.shape[1]:
            raise ValueError("grouping scheme does not match channel columns")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "g", g)


@dataclass(frozen=True, eq=False)
class DecodeResult:
    decided: RealSymbolVector
    candidate_evaluations: int
    per_group_counts: tuple = ()


def complement_projector(b):
    """Orthogonal projector onto the complement of the column space of b.

    b may have zero columns, in which case the projector is the identity.
    Rank is decided at the package-wide relative singular value threshold.
    """
    b = np.asarray(b, dtype=float)
    dim = b.shape[0]
    if b.ndim != 2:
        raise ValueError("expected a 2-D array of spanning columns")
    if b.shape[1] == 0:
        return np.eye(dim)
    u, s, _ = np.linalg.svd(b, full_matrices=False)
    rank = int(np.sum(s > RANK_EPS * s[0])) if s[0] > 0 else 0
    u = u[:, :rank]
    return np.eye(dim) - u @ u.T


@lru_cache(maxsize=None)
def _candidate_grid(sizes):
    """Lexicographic index grid over per-symbol alphabet sizes (cached)."""
    if not sizes:
        out = np.zeros((1, 0), dtype=np.int64)
    else:
        grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
        out = np.stack([g.ravel() for g in grids], axis=1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _candidate_levels(alphabets):
    """Level-value rows matching _candidate_grid for a tuple of alphabets (cached)."""
    idx = _candidate_grid(tuple(a.size for a in alphabets))
    if not alphabets:
        return np.zeros((1, 0))
    out = np.stack([alphabets[j].levels[idx[:, j]] for j in range(len(alphabets))],
                   axis=1)
    out.setflags(write=False)
    return out


def group_joint_decode(py, pg, alphabets, snr, mode="exhaustive"):
    """Jointly decode one group from its projected observation.

    Returns (level values, level indices, metric evaluation count).  Both
    modes return the same argmin; the conditioned mode falls back to the
    exhaustive search when the pivot column is degenerate.
    """
    py = np.asarray(py, dtype=float)
    pg = np.asarray(pg, dtype=float)
    n = pg.shape[1]
    if len(alphabets) != n:
        raise ValueError("need one alphabet per group column")
    alphabets = tuple(alphabets)
    root_snr = np.sqrt(snr)

    if mode == "conditioned" and n >= 1:
        pivot = pg[:, 0]
        if float(pivot @ pivot) >= DEGENERATE_PIVOT ** 2:
            return _conditioned_search(py, pg, alphabets, root_snr)
    elif mode not in ("exhaustive", "conditioned"):
        raise ValueError(f"unknown group search mode {mode!r}")

    idx = _candidate_grid(tuple(a.size for a in alphabets))
    cand = _candidate_levels(alphabets)
    resid = py[None, :] - root_snr * (cand @ pg.T)
    metrics = np.einsum("ij,ij->i", resid, resid)
    best = int(np.argmin(metrics))
    return cand[best].copy(), idx[best].copy(), len(metrics)


def _conditioned_search(py, pg, alphabets, root_snr):
    pivot = pg[:, 0]
    pivot_sq = float(pivot @ pivot)
    rest_idx = _candidate_grid(tuple(a.size for a in alphabets[1:]))
    rest_levels = _candidate_levels(alphabets[1:])  # (C, n-1); one empty row for n = 1
    resid = py[None, :] - root_snr * (rest_levels @ pg[:, 1:].T)
    ls = (resid @ pivot) / (root_snr * pivot_sq)
    piv_idx = alphabets[0].nearest_index(ls)
    piv_levels = alphabets[0].levels[piv_idx]
    # metric evaluated exactly as the exhaustive mode would for this candidate
    full = np.concatenate([piv_levels[:, None], rest_levels], axis=1)
    resid_full = py[None, :] - root_snr * (full @ pg.T)
    metrics = np.einsum("ij,ij->i", resid_full, resid_full)
    best = int(np.argmin(metrics))
    idx = np.concatenate([[piv_idx[best]], rest_idx[best]]).astype(np.int64)
    return full[best].copy(), idx, len(metrics)


def pic_decode(problem, mode="exhaustive"):
    """Decode every group independently after projecting the others out."""
    scheme = problem.scheme
    x_hat = np.zeros(problem.g.shape[1])
    counts = []
    for k in range(scheme.num_groups):
        group = list(scheme.groups[k])
        others = list(scheme.complement(k))
        proj = complement_projector(problem.g[:, others])
        py = proj @ problem.y
        pg = proj @ problem.g[:, group]
        levels, _, used = group_joint_decode(
            py, pg, tuple(problem.alphabets[j] for j in group), problem.snr, mode
        )
        x_hat[group] = levels
        counts.append(used)
    return DecodeResult(
        RealSymbolVector(x_hat, alphabets=tuple(problem.alphabets)),
        int(sum(counts)), tuple(counts),
    )


def _later_group_bases(scheme, g):
    """Orthonormal bases of the spans of each group's later channel columns.

    Built in one reverse sweep with reorthogonalized Gram-Schmidt; columns
    numerically inside the running span (relative residual below RANK_EPS)
    are skipped.  bases[k] spans exactly {g_j : j in groups after k}.
    """
    bases = [None] * scheme.num_groups
    u = np.zeros((g.shape[0], 0))
    for k in reversed(range(scheme.num_groups)):
        bases[k] = u
        for j in scheme.groups[k]:
            c = g[:, j]
            v = c - u @ (u.T @ c)
            v -= u @ (u.T @ v)
            norm_v = np.sqrt(v @ v)
            norm_c = np.sqrt(c @ c)
            if norm_c > 0 and norm_v > RANK_EPS * norm_c:
                u = np.concatenate([u, (v / norm_v)[:, None]], axis=1)
    return bases


def picsic_decode(problem, mode="exhaustive"):
    """Decode groups in order, cancelling each decoded group from the residual.

    Projections onto the complements of the later groups' spans are applied
    through precomputed orthonormal bases (y - U (U^T y)), which is the same
    map as multiplying by the complement projector.
    """
    scheme = problem.scheme
    x_hat = np.zeros(problem.g.shape[1])
    counts = []
    y_k = problem.y.copy()
    root_snr = np.sqrt(problem.snr)
    bases = _later_group_bases(scheme, problem.g)
    for k in range(scheme.num_groups):
        group = list(scheme.groups[k])
        u = bases[k]
        gk = problem.g[:, group]
        if u.shape[1]:
            py = y_k - u @ (u.T @ y_k)
            pg = gk - u @ (u.T @ gk)
        else:
            py, pg = y_k, gk
        levels, _, used = group_joint_decode(
            py, pg, tuple(problem.alphabets[j] for j in group), problem.snr, mode
        )
        x_hat[group] = levels
        counts.append(used)
        y_k = y_k - root_snr * (gk @ levels)
    return DecodeResult(
        RealSymbolVector(x_hat, alphabets=tuple(problem.alphabets)),
        int(sum(counts)), tuple(counts),
    )


def ml_decode(problem, cap=DEFAULT_ML_CAP):
    """Exhaustive maximum-likelihood search over the full alphabet product."""
    sizes = tuple(a.size for a in problem.alphabets)
    total = int(np.prod(sizes, dtype=np.int64))
    if total > cap:
        raise ValueError(f"ML search space {total} exceeds the cap {cap}")
    levels, _, used = group_joint_decode(
        problem.y, problem.g, problem.alphabets, problem.snr, mode="exhaustive"
    )
    return DecodeResult(
        RealSymbolVector(levels, alphabets=tuple(problem.alphabets)),
        used, (used,),
    )


def zf_decode(problem):
    """Zero-forcing: pseudo-inverse estimate, then per-symbol quantization."""
    estimate = np.linalg.pinv(np.sqrt(problem.snr) * problem.g,
                              rcond=RANK_EPS) @ problem.y
    x_hat = np.array([problem.alphabets[j].quantize(estimate[j])
                      for j in range(estimate.size)])
    return DecodeResult(
        RealSymbolVector(x_hat, alphabets=tuple(problem.alphabets)), 0, ()
    )


DECODERS = {
    "ml": lambda p, mode: ml_decode(p),
    "zf": lambda p, mode: zf_decode(p),
    "pic": pic_decode,
    "picsic": picsic_decode,
}


def decode(problem, name, mode="exhaustive"):
    """Dispatch by decoder name: ml | zf | pic | picsic."""
    try:
        fn = DECODERS[name]
    except KeyError:
        raise ValueError(f"unknown decoder {name!r}; choose from {sorted(DECODERS)}")
    return fn(problem, mode)
