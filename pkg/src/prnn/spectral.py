"""Eigen- and Jordan-structure of transition matrices.

Numerical Jordan forms are ill-posed, so the decomposition here is
eigenvalue-led: blocks stay 1x1 (real eigenvalue) or one 2x2 cell
(conjugate pair) unless eigenvalues cluster within a tolerance. A cluster
is treated as one defective block: its invariant subspace is extracted with
a sorted Schur decomposition and a Jordan chain basis is built inside it by
the nullspace staircase. Learned transition matrices are almost surely
diagonalizable, so the chain path is exercised mainly by hand-built
matrices with exact multiple eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg

from .model import _readonly

# cond(V) beyond which an eigendecomposition is treated as unusable
DEFECTIVE_COND = 1.0 / math.sqrt(np.finfo(float).eps)

# default relative tolerance for merging eigenvalues into one block
CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class EigenDecomposition:
    """w = v @ diag(lambdas) @ inv(v), eigenvalues sorted by decreasing modulus.

    Ties in modulus are broken by decreasing real part, then decreasing
    imaginary part, so conjugate pairs sit at adjacent indices with the
    positive-imaginary member first. ``x`` holds the start-vector
    coordinates inv(v) @ x0, i.e. f(t) = v @ diag(lambdas)**t @ x.
    """

    v: np.ndarray
    lambdas: np.ndarray
    x: np.ndarray
    cond_v: float
    near_defective: bool

    @property
    def n(self) -> int:
        return self.lambdas.shape[0]


def _sort_order(lambdas: np.ndarray) -> np.ndarray:
    return np.lexsort((-lambdas.imag, -lambdas.real, -np.abs(lambdas)))


def eigendecompose(w: np.ndarray, x0: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of w plus the coordinates of x0 in the eigenbasis.

    When the eigenvector matrix is ill-conditioned beyond DEFECTIVE_COND the
    result is flagged ``near_defective``: the factorization is returned but
    downstream consumers that rely on a proper eigenbasis must reject it.
    """
    w = np.atleast_2d(np.asarray(w, dtype=float))
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square matrix, got {w.shape}")
    if x0.shape[0] != w.shape[0]:
        raise ValueError(f"start vector length {x0.shape[0]} does not match matrix size {w.shape[0]}")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(x0))):
        raise ValueError("non-finite values in input")
    try:
        lambdas, v = np.linalg.eig(w)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigendecomposition failed: {exc}") from exc
    lambdas = lambdas.astype(complex)
    v = v.astype(complex)
    order = _sort_order(lambdas)
    lambdas = lambdas[order]
    v = v[:, order]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        cond_v = float(np.linalg.cond(v))
    near_defective = (not np.isfinite(cond_v)) or cond_v > DEFECTIVE_COND
    try:
        x = np.linalg.solve(v, x0.astype(complex))
        if not np.all(np.isfinite(x)):
            raise np.linalg.LinAlgError("non-finite solve result")
    except np.linalg.LinAlgError:
        # singular eigenbasis: fall back to the pseudo-inverse coordinates
        x = np.linalg.lstsq(v, x0.astype(complex), rcond=None)[0]
        near_defective = True
    return EigenDecomposition(v=v, lambdas=lambdas, x=x, cond_v=cond_v, near_defective=near_defective)


def jordan_block_power(lam: complex, m: int, t: int) -> np.ndarray:
    """Closed-form t-th power of the m x m Jordan block with eigenvalue lam.

    The power is upper triangular Toeplitz with entry (i, j) equal to
    binomial(t, j-i) * lam**(t-(j-i)); the 0**0 = 1 convention covers the
    nilpotent diagonal where j - i = t.
    """
    if m < 1:
        raise ValueError(f"block size must be >= 1, got {m}")
    if t < 0 or int(t) != t:
        raise ValueError(f"t must be a non-negative integer, got {t}")
    t = int(t)
    lam = complex(lam)
    out = np.zeros((m, m), dtype=complex)
    for k in range(min(m, t + 1)):
        value = math.comb(t, k) * lam ** (t - k)
        for i in range(m - k):
            out[i, i + k] = value
    return out


@dataclass(frozen=True)
class RealJordanBlock:
    """One block of the real Jordan form.

    kind "real": the ordinary m x m block J_m(lam) for a real eigenvalue.
    kind "complex": m cells of the 2x2 rotation-scaling matrix
    M = [[re, im], [-im, re]] with 2x2 identity cells on the superdiagonal,
    total width 2m; it stands for the conjugate pair (lam, conj(lam)).
    """

    kind: Literal["real", "complex"]
    lam: complex
    m: int

    def __post_init__(self):
        if self.kind not in ("real", "complex"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.m < 1:
            raise ValueError(f"block multiplicity must be >= 1, got {self.m}")
        lam = complex(self.lam)
        if self.kind == "complex" and lam.imag == 0.0:
            raise ValueError("complex-pair block requires a properly complex eigenvalue")
        if self.kind == "real" and lam.imag != 0.0:
            raise ValueError("real block requires a real eigenvalue")
        object.__setattr__(self, "lam", lam)

    @property
    def width(self) -> int:
        return self.m if self.kind == "real" else 2 * self.m

    @property
    def modulus(self) -> float:
        return abs(self.lam)

    def matrix(self) -> np.ndarray:
        """The block as a dense real matrix."""
        if self.kind == "real":
            j = np.eye(self.m) * self.lam.real
            for i in range(self.m - 1):
                j[i, i + 1] = 1.0
            return j
        cell = np.array([[self.lam.real, self.lam.imag], [-self.lam.imag, self.lam.real]])
        j = np.kron(np.eye(self.m), cell)
        for i in range(self.m - 1):
            j[2 * i, 2 * i + 2] = 1.0
            j[2 * i + 1, 2 * i + 3] = 1.0
        return j


@dataclass(frozen=True)
class JordanForm:
    """Real Jordan data (blocks, a, y) with f(t) = a @ J**t @ y on the stored rows.

    ``a`` keeps only the output rows of the rebased basis unless the
    decomposition was requested with the full basis, in which case
    ``a_full`` carries every row.
    """

    blocks: tuple[RealJordanBlock, ...]
    a: np.ndarray
    y: np.ndarray
    cond_basis: float = float("nan")
    a_full: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "a", _readonly(self.a))
        object.__setattr__(self, "y", _readonly(self.y))
        if self.a_full is not None:
            object.__setattr__(self, "a_full", _readonly(self.a_full))
        if self.a.shape[1] != self.width or self.y.shape[0] != self.width:
            raise ValueError("a/y widths do not match the block widths")

    @property
    def width(self) -> int:
        return sum(b.width for b in self.blocks)

    def block_slices(self) -> list[slice]:
        slices, at = [], 0
        for b in self.blocks:
            slices.append(slice(at, at + b.width))
            at += b.width
        return slices

    def jordan_matrix(self) -> np.ndarray:
        """Assembled block-diagonal real Jordan matrix."""
        return scipy.linalg.block_diag(*[b.matrix() for b in self.blocks])


def _cluster_indices(lambdas: np.ndarray, tol: float) -> list[list[int]]:
    """Union-find clustering of eigenvalues within a relative tolerance.

    Raises when a cluster is chained together from pairwise-close members
    but spans more than 10x the tolerance, since block assignment would
    then be arbitrary.
    """
    n = lambdas.shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1.0, abs(lambdas[i]), abs(lambdas[j]))
            if abs(lambdas[i] - lambdas[j]) <= tol * scale:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = sorted(groups.values(), key=lambda g: min(g))
    for g in clusters:
        if len(g) > 1:
            vals = lambdas[g]
            scale = max(1.0, float(np.max(np.abs(vals))))
            diam = max(abs(a - b) for a in vals for b in vals)
            if diam > 10.0 * tol * scale:
                raise ValueError(
                    f"eigenvalue cluster around {np.mean(vals):.6g} spans {diam:.3g}, "
                    f"more than 10x the clustering tolerance {tol:.3g}; adjust tol"
                )
    return clusters


def _staircase_chains(k_mat: np.ndarray, mult: int, radius: float) -> list[list[np.ndarray]]:
    """Jordan chains of a small (near-)nilpotent matrix.

    ``k_mat`` is the cluster restriction shifted by its mean eigenvalue, so
    every direction is generalized-null; ``radius`` bounds how far the
    cluster members sit from the mean and drives the rank cut-offs. Returns
    chains as lists [v1, ..., vp] with k_mat @ v_{i+1} ~= v_i and v1 an
    eigenvector.
    """
    s = k_mat.shape[0]
    sig1 = max(float(np.linalg.norm(k_mat, 2)), np.finfo(float).tiny)
    eps = np.finfo(float).eps

    nullspaces = [np.zeros((s, 0), dtype=k_mat.dtype)]
    dims = [0]
    power = np.eye(s, dtype=k_mat.dtype)
    for j in range(1, s + 1):
        power = power @ k_mat
        u, sig, vh = np.linalg.svd(power)
        floor = max(s * eps * sig1**j, 10.0 * radius * sig1 ** (j - 1))
        cut = max(floor, math.sqrt(eps) * (sig[0] if sig.size else 0.0))
        nullity = int(np.sum(sig <= cut)) + (s - sig.shape[0])
        nullity = min(max(nullity, dims[-1]), mult)
        nullspaces.append(vh[s - nullity :].conj().T if nullity else np.zeros((s, 0), dtype=k_mat.dtype))
        dims.append(nullity)
        if nullity >= mult:
            break
    if dims[-1] < mult:
        raise np.linalg.LinAlgError(
            f"could not resolve a Jordan chain basis: found nullity {dims[-1]} of {mult}"
        )

    p = len(dims) - 1
    # number of chains reaching grade j
    reach = [0] * (p + 2)
    for j in range(1, p + 1):
        reach[j] = dims[j] - dims[j - 1]

    def complement(candidates: np.ndarray, against: np.ndarray, count: int) -> np.ndarray:
        """Pick `count` orthonormal columns of `candidates` independent of `against`."""
        if against.shape[1]:
            q, _ = np.linalg.qr(against)
            candidates = candidates - q @ (q.conj().T @ candidates)
        u, sig, _ = np.linalg.svd(candidates, full_matrices=False)
        if count and (sig.shape[0] < count or sig[count - 1] <= math.sqrt(eps)):
            raise np.linalg.LinAlgError("degenerate chain starter selection")
        return u[:, :count]

    chains: list[list[np.ndarray]] = []
    inherited = np.zeros((s, 0), dtype=k_mat.dtype)  # K @ starters from the grade above
    for j in range(p, 0, -1):
        n_new = reach[j] - reach[j + 1]
        if n_new > 0:
            against = np.hstack([nullspaces[j - 1], inherited])
            starters = complement(nullspaces[j], against, n_new)
            for idx in range(n_new):
                top = starters[:, idx]
                chain = [top]
                for _ in range(j - 1):
                    chain.append(k_mat @ chain[-1])
                chain.reverse()
                chains.append(chain)
        # all chains alive at this grade contribute their grade-j vector downward
        alive = [c for c in chains if len(c) >= j]
        inherited = np.column_stack([c[j - 2] for c in alive]) if j > 1 and alive else np.zeros((s, 0), dtype=k_mat.dtype)
    chains.sort(key=len, reverse=True)
    return chains


def _defective_cluster_basis(
    w: np.ndarray, lam: complex, mult: int, sel_tol: float, is_pair: bool
) -> list[tuple[int, np.ndarray]]:
    """Chain columns for a defective cluster, via its Schur invariant subspace.

    Returns a list of (chain length, N x width column block); for pair
    clusters the columns interleave real and imaginary parts chain-wise.
    """
    if is_pair:
        def select(re, im):
            return min(abs(complex(re, im) - lam), abs(complex(re, im) - lam.conjugate())) <= sel_tol
        want = 2 * mult
    else:
        def select(re, im):
            return abs(complex(re, im) - lam) <= sel_tol
        want = mult

    t_mat, z_mat, sdim = scipy.linalg.schur(w, output="real", sort=select)
    if sdim != want:
        raise np.linalg.LinAlgError(
            f"invariant subspace selection found dimension {sdim}, expected {want}; "
            "the eigenvalue cluster is not well separated"
        )
    q = z_mat[:, :sdim]
    t11 = t_mat[:sdim, :sdim]

    evs = np.linalg.eigvals(t11)
    if is_pair:
        radius = float(np.max(np.minimum(np.abs(evs - lam), np.abs(evs - lam.conjugate()))))
        k_small = t11.astype(complex) - lam * np.eye(sdim)
    else:
        radius = float(np.max(np.abs(evs - lam)))
        k_small = t11 - lam.real * np.eye(sdim)

    chains = _staircase_chains(k_small, mult, radius)
    out = []
    for chain in chains:
        if is_pair:
            cols = np.empty((w.shape[0], 2 * len(chain)))
            for i, vec in enumerate(chain):
                lifted = q @ vec
                cols[:, 2 * i] = lifted.real
                cols[:, 2 * i + 1] = lifted.imag
        else:
            cols = np.column_stack([q @ vec for vec in chain])
        out.append((len(chain), cols))
    return out


def _toeplitz_factor(kind: str, y_block: np.ndarray, x_block: np.ndarray) -> np.ndarray:
    """Solve x = B y for the factor B commuting with one real Jordan block.

    For a real block B is upper triangular Toeplitz; for a pair block its
    2x2 cells each have the rotation-scaling shape [[p, q], [-q, p]]. The
    system is solvable whenever the trailing (cell) entry of y is non-zero.
    """
    if kind == "real":
        m = y_block.shape[0]
        t = np.zeros((m, m))
        for i in range(m):
            for k in range(m - i):
                t[i, k] = y_block[i + k]
        b = np.linalg.solve(t, x_block)
        out = np.zeros((m, m))
        for k in range(m):
            for i in range(m - k):
                out[i, i + k] = b[k]
        return out
    m = y_block.shape[0] // 2
    g = np.zeros((2 * m, 2 * m))
    for i in range(m):
        for k in range(m - i):
            y1, y2 = y_block[2 * (i + k)], y_block[2 * (i + k) + 1]
            g[2 * i : 2 * i + 2, 2 * k : 2 * k + 2] = [[y1, y2], [y2, -y1]]
    pq = np.linalg.solve(g, x_block)
    out = np.zeros((2 * m, 2 * m))
    for k in range(m):
        cell = np.array([[pq[2 * k], pq[2 * k + 1]], [-pq[2 * k + 1], pq[2 * k]]])
        for i in range(m - k):
            out[2 * i : 2 * i + 2, 2 * (i + k) : 2 * (i + k) + 2] = cell
    return out


def rebase_start(
    basis: np.ndarray,
    blocks: tuple[RealJordanBlock, ...],
    x0: np.ndarray,
    y: np.ndarray,
) -> np.ndarray:
    """Matrix a with a @ J**t @ y == w**t @ x0 for all integers t >= 0.

    ``basis`` is the real Jordan basis (w = basis @ J @ inv(basis)). Per
    block the method solves the Toeplitz system x = B y for a factor B that
    commutes with the block, then a = basis @ blockdiag(B). The rebase
    vector y must have all non-zero entries.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if np.any(y == 0.0):
        raise ValueError("rebase vector must have all non-zero entries")
    n = basis.shape[0]
    if y.shape[0] != n or x0.shape[0] != n:
        raise ValueError("vector lengths do not match the basis size")
    try:
        x = np.linalg.solve(basis, x0)
        if not np.all(np.isfinite(x)):
            raise np.linalg.LinAlgError("non-finite solve result")
    except np.linalg.LinAlgError:
        x = np.linalg.lstsq(basis, x0, rcond=None)[0]
    factor = np.zeros((n, n))
    at = 0
    for block in blocks:
        sl = slice(at, at + block.width)
        factor[sl, sl] = _toeplitz_factor(block.kind, y[sl], x[sl])
        at += block.width
    return basis @ factor


def real_jordan(
    w: np.ndarray,
    x0: np.ndarray,
    tol: float = CLUSTER_TOL,
    d_out: int | None = None,
    keep_full_basis: bool = False,
) -> JordanForm:
    """Real Jordan form of w with the rebased output map.

    Eigenvalues within ``tol`` (relative) of each other are merged into one
    defective block; conjugate pairs become real 2x2-cell blocks; everything
    else stays 1x1. The returned ``a`` is restricted to the first ``d_out``
    rows (all rows when None, also kept separately under ``a_full`` when
    ``keep_full_basis`` is set) and satisfies a @ J**t @ y = (w**t @ x0)[:d_out]
    with y the all-ones vector.
    """
    w = np.atleast_2d(np.asarray(w, dtype=float))
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    n = w.shape[0]
    if w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square matrix, got {w.shape}")
    if x0.shape[0] != n:
        raise ValueError("start vector length does not match the matrix size")
    lambdas, v = np.linalg.eig(w)
    order = _sort_order(lambdas)
    lambdas, v = lambdas[order], v[:, order]

    clusters = _cluster_indices(lambdas, tol)
    means = [complex(np.mean(lambdas[g])) for g in clusters]
    consumed = [False] * len(clusters)
    entries: list[tuple[complex, RealJordanBlock, np.ndarray]] = []

    for ci, group in enumerate(clusters):
        if consumed[ci]:
            continue
        mean = means[ci]
        # locate the conjugate cluster; if it is this one, the block is real-type
        mirror = min(range(len(clusters)), key=lambda j: abs(means[j] - mean.conjugate()))
        if mirror == ci:
            lam = complex(mean.real, 0.0)
            consumed[ci] = True
            if len(group) == 1:
                cols = v[:, group[0]].real.reshape(-1, 1)
                entries.append((lam, RealJordanBlock("real", lam, 1), cols))
            else:
                sel_tol = _selection_tol(lambdas, group, lambda z: abs(z - lam))
                for m_i, cols in _defective_cluster_basis(w, lam, len(group), sel_tol, is_pair=False):
                    entries.append((lam, RealJordanBlock("real", lam, m_i), cols))
        else:
            if consumed[mirror] or len(clusters[mirror]) != len(group):
                raise np.linalg.LinAlgError("inconsistent conjugate pairing of eigenvalue clusters")
            consumed[ci] = consumed[mirror] = True
            lam = mean if mean.imag > 0 else mean.conjugate()
            if len(group) == 1:
                idx = group[0] if lambdas[group[0]].imag > 0 else clusters[mirror][0]
                vec = v[:, idx]
                cols = np.column_stack([vec.real, vec.imag])
                entries.append((lam, RealJordanBlock("complex", lam, 1), cols))
            else:
                pair_dist = lambda z: min(abs(z - lam), abs(z - lam.conjugate()))
                sel_tol = _selection_tol(lambdas, group + clusters[mirror], pair_dist)
                for m_i, cols in _defective_cluster_basis(w, lam, len(group), sel_tol, is_pair=True):
                    entries.append((lam, RealJordanBlock("complex", lam, m_i), cols))

    # dominant blocks first, same tie-breaking as the eigenvalue sort
    entries.sort(key=lambda e: (-abs(e[0]), -e[0].real, -e[0].imag, -e[1].m))
    blocks = tuple(e[1] for e in entries)
    basis = np.hstack([e[2] for e in entries])
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        cond_basis = float(np.linalg.cond(basis))

    y = np.ones(n)
    a_full = rebase_start(basis, blocks, x0, y)
    a = a_full if d_out is None else a_full[:d_out]
    return JordanForm(
        blocks=blocks,
        a=a,
        y=y,
        cond_basis=cond_basis,
        a_full=a_full if keep_full_basis else None,
    )


def _selection_tol(lambdas: np.ndarray, member_idx: list[int], dist) -> float:
    """Half-gap selection radius separating a cluster from the rest of the spectrum.

    ``dist`` measures how far an eigenvalue is from the cluster; for a
    conjugate-pair cluster it is the distance to the nearer of the two
    representatives, matching the Schur selection predicate.
    """
    members = set(member_idx)
    radius = max(dist(lambdas[i]) for i in members)
    rest = [dist(lambdas[i]) for i in range(lambdas.shape[0]) if i not in members]
    if not rest:
        return max(radius * 2.0, 1e-8)
    gap = min(rest)
    if gap <= radius:
        raise np.linalg.LinAlgError("eigenvalue cluster overlaps the remaining spectrum")
    return 0.5 * (radius + gap)


def evaluate_fractional(decomp: EigenDecomposition, t: float) -> np.ndarray:
    """Evaluate v @ diag(lambdas)**t @ x at a real-valued time.

    Eigenvalue powers use the principal branch, lam**t = exp(t * Log lam),
    so the interpolated state is complex in general even for real networks.
    Requires a usable eigenbasis (not near-defective); a zero eigenvalue
    admits only t >= 0.
    """
    if decomp.near_defective:
        raise ValueError("eigendecomposition is near-defective; fractional evaluation is unreliable")
    t = float(t)
    lambdas = decomp.lambdas
    powers = np.empty_like(lambdas)
    for i, lam in enumerate(lambdas):
        if lam == 0:
            if t < 0:
                raise ValueError("zero eigenvalue cannot be raised to a negative power")
            powers[i] = 1.0 if t == 0 else 0.0
        else:
            powers[i] = np.exp(t * np.log(lam))
    return decomp.v @ (powers * decomp.x)
