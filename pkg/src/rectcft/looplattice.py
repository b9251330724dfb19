"""Temperley-Lieb dense loop model on N strands with free boundaries.

Link states are non-crossing perfect matchings of N sites (the j = 0
sector, Catalan(N/2) of them).  The Hamiltonian H = -sum_i e_i acts in the
link basis; the loop bilinear form <s1|s2> = beta^{#loops} makes H
self-adjoint, G H = H^T G.  At the root-of-unity weights used here the
Gram form is positive semidefinite with a nontrivial radical, so physical
eigenstates are extracted by projecting Gram-null directions out of each
(near-)degenerate eigenvalue cluster.

Two diagonalization paths, cross-checked in the tests:
  dense (N <= 16):  full nonsymmetric eig + per-cluster Gram projection
                    (a Cholesky pencil solve is used when G is positive
                    definite, e.g. larger p);
  sparse (N > 16):  ARPACK on H and H^T; for a simple eigenvalue the left
                    eigenvector w is proportional to G v, and the constant
                    follows from a single computable row of G, giving loop
                    norms and overlaps without ever materializing G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from .fitting import ABSOLUTE_BASIS, RATIO_BASIS, FitError, extract_overlap, fit

DENSE_LIMIT = 16


@dataclass(frozen=True)
class LoopWeight:
    """beta = 2 cos(pi/(p+1)) and c = 1 - 6/(p(p+1)); p = inf means beta = 2."""

    p: float

    @property
    def beta(self) -> float:
        if math.isinf(self.p):
            return 2.0
        return 2.0 * math.cos(math.pi / (self.p + 1))

    @property
    def central_charge(self) -> float:
        if math.isinf(self.p):
            return 1.0
        return 1.0 - 6.0 / (self.p * (self.p + 1))


def parse_p(text) -> LoopWeight:
    if isinstance(text, (int, float)):
        return LoopWeight(float(text))
    if str(text).lower() in ("inf", "infinity", "oo"):
        return LoopWeight(math.inf)
    return LoopWeight(float(text))


def enumerate_links(n_sites: int) -> list[tuple]:
    """All non-crossing perfect matchings of 0..N-1, each as the tuple of
    partner indices.  Count = Catalan(N/2)."""
    if n_sites % 2:
        raise ValueError("need an even number of sites")

    def gen(sites):
        if not sites:
            yield ()
            return
        first = sites[0]
        for idx in range(1, len(sites), 2):
            partner = sites[idx]
            for inner in gen(sites[1:idx]):
                for outer in gen(sites[idx + 1:]):
                    yield ((first, partner),) + inner + outer

    out = []
    for pairs in gen(tuple(range(n_sites))):
        m = [0] * n_sites
        for a, b in pairs:
            m[a], m[b] = b, a
        out.append(tuple(m))
    return out


def adjacent_state(n_sites: int) -> tuple:
    """(12)(34)...: every site paired with its neighbor."""
    return tuple(i + 1 if i % 2 == 0 else i - 1 for i in range(n_sites))


def apply_tl(i: int, state: tuple):
    """e_i on a link state (pairs sites i, i+1, 0-based i <= N-2).

    Returns (new_state, closed_loop): the new pairing joins (i, i+1) and the
    former partners of i and i+1; a closed loop appears iff i and i+1 were
    already partners (diagrammatically worth a factor beta)."""
    a, b = state[i], state[i + 1]
    if a == i + 1:
        return state, True
    t = list(state)
    t[i], t[i + 1] = i + 1, i
    t[a], t[b] = b, a
    return tuple(t), False


def loops_between(s1: tuple, s2: tuple) -> int:
    """Closed loops formed by gluing s2 against the mirror image of s1:
    the number of orbits of the composition of the two involutions."""
    n = len(s1)
    seen = [False] * n
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        x = start
        while not seen[x]:
            seen[x] = True
            y = s2[x]
            seen[y] = True
            x = s1[y]
    return count


def gram(n_sites: int, beta: float) -> np.ndarray:
    states = enumerate_links(n_sites)
    d = len(states)
    g = np.empty((d, d))
    for a in range(d):
        for b in range(a, d):
            g[a, b] = g[b, a] = beta ** loops_between(states[a], states[b])
    return g


def hamiltonian(n_sites: int, beta: float) -> np.ndarray:
    states = enumerate_links(n_sites)
    index = {s: k for k, s in enumerate(states)}
    d = len(states)
    h = np.zeros((d, d))
    for k, s in enumerate(states):
        for i in range(n_sites - 1):
            t, closed = apply_tl(i, s)
            h[index[t], k] -= beta if closed else 1.0
    return h


def tl_generator_matrix(i: int, n_sites: int, beta: float) -> np.ndarray:
    states = enumerate_links(n_sites)
    index = {s: k for k, s in enumerate(states)}
    d = len(states)
    e = np.zeros((d, d))
    for k, s in enumerate(states):
        t, closed = apply_tl(i, s)
        e[index[t], k] += beta if closed else 1.0
    return e


def sparse_structure(n_sites: int):
    """(states, index, offdiag A, diagonal loop counts); H = -(A + beta*diag).

    beta-independent, so one build serves the whole p sweep."""
    states = enumerate_links(n_sites)
    index = {s: k for k, s in enumerate(states)}
    d = len(states)
    rows, cols = [], []
    diag = np.zeros(d)
    for k, s in enumerate(states):
        for i in range(n_sites - 1):
            t, closed = apply_tl(i, s)
            if closed:
                diag[k] += 1.0
            else:
                rows.append(index[t])
                cols.append(k)
    a = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(d, d)).tocsr()
    return states, index, a, diag


def boundary_link_state(n_sites: int, beta: float) -> np.ndarray:
    """beta^{-N/2} on the all-adjacent-arcs pattern, as a link-basis vector."""
    states = enumerate_links(n_sites)
    index = {s: k for k, s in enumerate(states)}
    v = np.zeros(len(states))
    v[index[adjacent_state(n_sites)]] = beta ** (-n_sites / 2)
    return v


def gram_row(states, beta: float, s0: tuple) -> np.ndarray:
    return np.array([beta ** loops_between(s0, s) for s in states])


class DegenerateNormError(ArithmeticError):
    pass


@dataclass
class SpectrumEntry:
    k: int
    energy: float
    vector: np.ndarray      # loop-normalized: v^T G v = 1
    boundary_overlap: float  # <B|k>, sign fixed >= 0


NULL_TOL = 1e-8


def spectrum_dense(n_sites: int, beta: float, count: int) -> list[SpectrumEntry]:
    """Lowest `count`+1 physical states by full diagonalization.

    Gram-positive-definite case: symmetric pencil (GH) v = E G v, which
    yields loop-normalized eigenvectors directly.  Otherwise (the loop form
    has a radical at these roots of unity) fall back to plain eig and
    project each eigenvalue cluster onto the Gram-positive subspace."""
    h = hamiltonian(n_sites, beta)
    g = gram(n_sites, beta)
    scale = g.max()
    # Cholesky alone is not a safe positivity test: at the root-of-unity
    # weights the Gram radical shows up as eigenvalues at roundoff scale,
    # which factor "successfully" and poison the pencil solve
    gram_eigs = np.linalg.eigvalsh(g)
    positive = gram_eigs.min() > 1e-10 * gram_eigs.max()
    picked = []  # (energy, loop-normalized vector)
    if positive:
        energies, vectors = sla.eigh(g @ h, g)
        order = np.argsort(energies)
        for t in order[:count + 1]:
            picked.append((float(energies[t]), vectors[:, t]))
    else:
        energies, vectors = sla.eig(h)
        if np.abs(energies.imag).max() > 1e-9:
            raise DegenerateNormError("complex eigenvalues in the link-basis H")
        energies = energies.real
        vectors = vectors.real
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]
        i = 0
        while i < len(energies) and len(picked) <= count:
            j = i
            while (j + 1 < len(energies)
                   and energies[j + 1] - energies[i] < 1e-9 * max(1.0, abs(energies[i]))):
                j += 1
            block = vectors[:, i:j + 1]
            m = block.T @ g @ block
            lam, u = np.linalg.eigh(m)
            if lam.min() < -NULL_TOL * scale:
                raise DegenerateNormError(
                    f"negative loop norm {lam.min()} at N={n_sites}")
            for t in range(len(lam)):
                if lam[t] > NULL_TOL * scale:
                    picked.append((float(energies[i:j + 1].mean()),
                                   block @ u[:, t] / math.sqrt(lam[t])))
            i = j + 1
    states = enumerate_links(n_sites)
    row = gram_row(states, beta, adjacent_state(n_sites))
    prefactor = beta ** (-n_sites / 2)
    out = []
    for k, (e, v) in enumerate(picked[:count + 1]):
        ovl = prefactor * float(row @ v)
        if ovl < 0:
            v = -v
            ovl = -ovl
        out.append(SpectrumEntry(k=k, energy=e, vector=v, boundary_overlap=ovl))
    return out


def spectrum_sparse(n_sites: int, beta: float, count: int,
                    n_eigs: int | None = None) -> list[SpectrumEntry]:
    """Lowest `count`+1 physical states via ARPACK without building G.

    Right and left eigenvectors (H and H^T) are matched by eigenvalue; for a
    simple physical eigenvalue G v = const * w, with the constant fixed by
    one row of G evaluated at the left vector's largest component.  Null
    states give const ~ 0 and are skipped."""
    states, index, a, diag = sparse_structure(n_sites)
    h = -(a + sp.diags(beta * diag)).tocsc()
    k_req = n_eigs or max(count + 6, 10)
    ncv = max(60, 5 * k_req)
    # fixed start vector: ARPACK's default is random, which would break the
    # byte-identical-rerun guarantee; the ones vector has a large component
    # along the sign-uniform ground state
    v0 = np.full(h.shape[0], 1.0 / math.sqrt(h.shape[0]))
    wr, vr = spl.eigs(h, k=k_req, which="SR", ncv=ncv, maxiter=20000, tol=0, v0=v0)
    wl, vl = spl.eigs(h.T.tocsc(), k=k_req, which="SR", ncv=ncv, maxiter=20000, tol=0, v0=v0)
    if max(np.abs(wr.imag).max(), np.abs(wl.imag).max()) > 1e-8:
        raise DegenerateNormError("complex ARPACK eigenvalues in the link-basis H")
    o1 = np.argsort(wr.real)
    o2 = np.argsort(wl.real)
    wr, vr = wr.real[o1], vr[:, o1].real
    wl, vl = wl.real[o2], vl[:, o2].real
    if np.abs(wr - wl).max() > 1e-7 * max(1.0, np.abs(wr).max()):
        raise DegenerateNormError("left/right ARPACK spectra disagree")
    adj = adjacent_state(n_sites)
    row_adj = gram_row(states, beta, adj)
    prefactor = beta ** (-n_sites / 2)
    out = []
    k_phys = 0
    for t in range(k_req):
        if k_phys > count:
            break
        v = vr[:, t]
        w = vl[:, t]
        anchor = int(np.argmax(np.abs(w)))
        row_anchor = gram_row(states, beta, states[anchor])
        gv_anchor = float(row_anchor @ v)
        const = gv_anchor / w[anchor]
        norm_sq = const * float(v @ w)
        if norm_sq <= NULL_TOL * float(np.abs(row_anchor).max()):
            continue  # Gram-null state
        v = v / math.sqrt(norm_sq)
        ovl = prefactor * float(row_adj @ v)
        if ovl < 0:
            v, ovl = -v, -ovl
        out.append(SpectrumEntry(k=k_phys, energy=float(wr[t]), vector=v,
                                 boundary_overlap=ovl))
        k_phys += 1
    if len(out) < count + 1:
        raise DegenerateNormError(
            f"only {len(out)} physical states converged at N={n_sites}; raise n_eigs")
    return out


def spectrum(n_sites: int, beta: float, count: int) -> list[SpectrumEntry]:
    if n_sites <= DENSE_LIMIT:
        return spectrum_dense(n_sites, beta, count)
    return spectrum_sparse(n_sites, beta, count)


@dataclass
class LoopOverlapRecord:
    p: float
    n_sites: int
    k: int
    energy: float
    overlap: float


def overlap_table(p, n_values, kmax: int = 3) -> list[LoopOverlapRecord]:
    weight = parse_p(p)
    out = []
    for n in sorted(n_values):
        for entry in spectrum(n, weight.beta, kmax):
            out.append(LoopOverlapRecord(p=weight.p, n_sites=n, k=entry.k,
                                         energy=entry.energy,
                                         overlap=entry.boundary_overlap))
    return out


def loop_fit_summary(records, drop_first_excited: int = 3) -> dict:
    """Table-style summary: a1 and alpha from the ground state (full window,
    scaling form with N, logN), excited overlaps from ratio fits dropping the
    first points, plus the raw k=2 overlaps (expected to vanish for N >= 10).
    """
    by_k: dict = {}
    p = None
    for r in records:
        p = r.p
        by_k.setdefault(r.k, []).append(r)
    ground = sorted(by_k[0], key=lambda r: r.n_sites)
    gdata = [(r.n_sites, -math.log(r.overlap)) for r in ground]
    g_by_n = {r.n_sites: r.overlap for r in ground}
    weight = LoopWeight(p)
    summary = {
        "p": p if not math.isinf(p) else "inf",
        "beta": weight.beta,
        "c": weight.central_charge,
        "a1_cft": -weight.central_charge / 8,
        "overlaps": {},
    }
    try:
        gfit = fit(gdata, ABSOLUTE_BASIS)
        summary["a1"] = gfit.coefficient("logN")
        summary["a1_spread"] = gfit.window_spread["logN"]
        summary["alpha"] = extract_overlap(gfit)
        summary["alpha_spread"] = summary["alpha"] * math.expm1(gfit.window_spread["1"])
    except FitError as exc:
        summary["fit_error"] = str(exc)
    if 1 in by_k:
        rows = sorted(by_k[1], key=lambda r: r.n_sites)
        data = [(r.n_sites, -math.log(r.overlap / g_by_n[r.n_sites])) for r in rows]
        try:
            rfit = fit(data, RATIO_BASIS, drop_first=drop_first_excited)
            summary["overlaps"][1] = {
                "value": extract_overlap(rfit),
                "spread": rfit.window_spread["1"],
                "cft": math.sqrt(weight.central_charge / 2),
            }
        except FitError as exc:
            summary["overlaps"][1] = {"fit_error": str(exc)}
    if 2 in by_k:
        worst = max(abs(r.overlap) for r in by_k[2] if r.n_sites >= 10)
        summary["overlaps"][2] = {"max_abs_for_n_ge_10": worst, "cft": 0.0}
    return summary
