"""The sum-product graph on R x R and its spectral certificate.

Vertices ``(a, b)`` are encoded as ``a.code * |R| + b.code``; ``(a, b)`` and
``(c, d)`` are adjacent iff ``a + c = b d``.  A vertex with ``2a = b^2`` carries
a loop, stored as a diagonal 1 so that every row of the adjacency matrix sums
to ``|R|``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from .eigen import EigenResult, jacobi_eigh
from .rings import RingElem, RingSpec

IMPLICIT = "implicit"
MATERIALIZED = "materialized"
DEFAULT_MAX_N = 4096

# relative tolerance for eigenvalue comparisons
EIG_RTOL = 1e-8


class GraphCapError(ValueError):
    pass


class SPGraph:
    """Sum-product graph of a finite valuation ring."""

    def __init__(self, ring: RingSpec, mode: str = IMPLICIT, max_n: int = DEFAULT_MAX_N):
        if mode not in (IMPLICIT, MATERIALIZED):
            raise ValueError(f"unknown adjacency mode {mode!r}")
        self.ring = ring
        self.mode = mode
        self.max_n = max_n
        if mode == MATERIALIZED and self.n > max_n:
            raise GraphCapError(
                f"{ring} gives n={self.n} vertices, above the materialization cap {max_n}"
            )
        self._matrix = self._build_matrix() if mode == MATERIALIZED else None

    @property
    def order(self) -> int:
        return self.ring.order

    @property
    def n(self) -> int:
        return self.ring.order**2

    @property
    def d(self) -> int:
        return self.ring.order

    def __repr__(self) -> str:
        return f"SPGraph({self.ring}, mode={self.mode!r}, n={self.n})"

    # -- vertices -------------------------------------------------------------

    def vertex(self, a, b) -> int:
        return _code(a) * self.order + _code(b)

    def split(self, v) -> tuple[np.ndarray, np.ndarray]:
        v = np.asarray(v, dtype=np.int64)
        return v // self.order, v % self.order

    def pair(self, v: int) -> tuple[RingElem, RingElem]:
        a, b = divmod(int(v), self.order)
        return self.ring.from_code(a), self.ring.from_code(b)

    def vertex_codes(self, vertices) -> np.ndarray:
        """Sorted, duplicate-free vertex codes from codes or ``(a, b)`` pairs."""
        if isinstance(vertices, np.ndarray):
            codes = vertices.astype(np.int64).ravel()
        else:
            codes = np.fromiter(
                (v if isinstance(v, (int, np.integer)) else self.vertex(*v) for v in vertices),
                dtype=np.int64,
            )
        if codes.size and (codes.min() < 0 or codes.max() >= self.n):
            raise ValueError("vertex code out of range")
        return np.unique(codes)

    # -- adjacency ------------------------------------------------------------

    def adjacent_codes(self, u, v) -> np.ndarray:
        """Vectorized edge test on (broadcastable) arrays of vertex codes."""
        a, b = self.split(u)
        c, d = self.split(v)
        return self.ring.add_codes(a, c) == self.ring.mul_codes(b, d)

    def adjacent(self, u, v) -> bool:
        u = u if isinstance(u, (int, np.integer)) else self.vertex(*u)
        v = v if isinstance(v, (int, np.integer)) else self.vertex(*v)
        if self._matrix is not None:
            return bool(self._matrix[u, v])
        return bool(self.adjacent_codes(u, v))

    def neighbors(self, v) -> np.ndarray:
        """Neighbor codes of each vertex in ``v``: shape ``v.shape + (|R|,)``.

        The neighbors of ``(a, b)`` are ``(b y - a, y)`` for ``y`` in R.
        """
        a, b = self.split(v)
        ys = np.arange(self.order, dtype=np.int64)
        first = self.ring.sub_codes(self.ring.mul_codes(b[..., None], ys), a[..., None])
        return first * self.order + ys

    def _build_matrix(self) -> np.ndarray:
        codes = np.arange(self.n, dtype=np.int64)
        a, b = self.split(codes)
        lhs = self.ring.add_codes(a[:, None], a[None, :])
        rhs = self.ring.mul_codes(b[:, None], b[None, :])
        mat = (lhs == rhs).astype(np.int8)
        if not np.array_equal(mat, mat.T):
            raise AssertionError("adjacency matrix is not symmetric")
        return mat

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            raise GraphCapError("adjacency matrix requires materialized mode")
        return self._matrix

    @cached_property
    def loops(self) -> np.ndarray:
        """Codes of the vertices ``(a, b)`` with ``2a = b^2``."""
        codes = np.arange(self.n, dtype=np.int64)
        return codes[self.adjacent_codes(codes, codes)]

    @cached_property
    def spectrum(self) -> EigenResult:
        return jacobi_eigh(self.matrix)


def _code(x) -> int:
    return x.code if isinstance(x, RingElem) else int(x)


def build_graph(spec: RingSpec, mode: str = IMPLICIT, max_n: int = DEFAULT_MAX_N) -> SPGraph:
    return SPGraph(spec, mode, max_n)


def degree_check(g: SPGraph) -> int:
    """Largest ``|deg(v) - d|`` over all vertices (loops counted once)."""
    if g.mode == MATERIALIZED:
        degrees = g.matrix.sum(axis=1, dtype=np.int64)
    else:
        codes = np.arange(g.n, dtype=np.int64)
        degrees = np.empty(g.n, dtype=np.int64)
        step = max(1, (1 << 22) // g.n)
        for lo in range(0, g.n, step):
            block = codes[lo : lo + step]
            degrees[lo : lo + step] = g.adjacent_codes(block[:, None], codes[None, :]).sum(axis=1)
    return int(np.abs(degrees - g.d).max())


def _as_code(g: SPGraph, v) -> int:
    return int(v) if isinstance(v, (int, np.integer)) else g.vertex(*v)


def common_neighbors_closed_form(g: SPGraph, u, v) -> int:
    """``q**alpha`` with ``alpha = nu(b - d)`` when ``nu(a - c) >= alpha``, else 0."""
    ring = g.ring
    a, b = divmod(_as_code(g, u), g.order)
    c, d = divmod(_as_code(g, v), g.order)
    alpha = ring.valuation_code(ring.sub_code(b, d))
    if ring.valuation_code(ring.sub_code(a, c)) >= alpha:
        return ring.q**alpha
    return 0


def common_neighbors_bruteforce(g: SPGraph, u, v) -> int:
    codes = np.arange(g.n, dtype=np.int64)
    both = g.adjacent_codes(codes, _as_code(g, u)) & g.adjacent_codes(codes, _as_code(g, v))
    return int(both.sum())


# ---------------------------------------------------------------------------
# A^2 decomposition


@dataclass
class A2Report:
    holds: bool
    max_deviation: int
    offending_pair: tuple[int, int] | None
    e_zero_empty: bool
    # alpha -> (max row sum, strict cap)
    e_valency: dict[int, tuple[int, int]] = field(default_factory=dict)
    f_valency: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def valency_ok(self) -> bool:
        return all(s < cap for s, cap in self.e_valency.values()) and all(
            s < cap for s, cap in self.f_valency.values()
        )

    def __bool__(self) -> bool:
        return self.holds and self.e_zero_empty and self.valency_ok


def valuation_classes(g: SPGraph) -> tuple[np.ndarray, np.ndarray]:
    """Matrices ``nu(a - c)`` and ``nu(b - d)`` over all vertex pairs."""
    ring = g.ring
    codes = np.arange(g.n, dtype=np.int64)
    a, b = g.split(codes)
    nu = ring.valuation_table
    nu_a = nu[ring.sub_codes(a[:, None], a[None, :])]
    nu_b = nu[ring.sub_codes(b[:, None], b[None, :])]
    return nu_a, nu_b


def verify_A2_identity(g: SPGraph) -> A2Report:
    """Check ``A^2 = J + (q^r - 1) I - sum E_alpha + sum (q^alpha - 1) F_alpha`` exactly.

    ``E_alpha`` joins pairs with ``nu(b-d) = alpha > nu(a-c)``; ``F_alpha`` those
    with ``nu(b-d) = alpha <= nu(a-c)``.
    """
    ring = g.ring
    q, r, n = ring.q, ring.r, g.n
    adj = g.matrix.astype(np.float64)
    # integer entries <= n, so the float product is exact
    a2 = np.rint(adj @ adj).astype(np.int64)
    nu_a, nu_b = valuation_classes(g)

    rhs = np.ones((n, n), dtype=np.int64)
    rhs[np.diag_indices(n)] += q**r - 1
    report = A2Report(True, 0, None, True)
    for alpha in range(r + 1):
        e_alpha = (nu_b == alpha) & (nu_a < alpha)
        rhs -= e_alpha
        if alpha == 0:
            report.e_zero_empty = not e_alpha.any()
        else:
            report.e_valency[alpha] = (int(e_alpha.sum(axis=1).max()), q ** (2 * r - alpha))
        if 1 <= alpha <= r - 1:
            f_alpha = (nu_b == alpha) & (nu_a >= alpha)
            rhs += (q**alpha - 1) * f_alpha
            report.f_valency[alpha] = (int(f_alpha.sum(axis=1).max()), q ** (2 * (r - alpha)))

    diff = np.abs(a2 - rhs)
    report.max_deviation = int(diff.max())
    if report.max_deviation:
        i, j = np.unravel_index(int(diff.argmax()), diff.shape)
        report.offending_pair = (int(i), int(j))
        report.holds = False
    return report


# ---------------------------------------------------------------------------
# spectrum and certificate


def eigen_spectrum(g: SPGraph) -> np.ndarray:
    """All ``n`` eigenvalues of the adjacency matrix, descending."""
    return g.spectrum.values


def lambda_bound(ring: RingSpec) -> float:
    return math.sqrt(2 * ring.r * ring.q ** (2 * ring.r - 1))


@dataclass(frozen=True)
class SpectralCert:
    ring: str
    n: int
    d: int
    lam: float
    bound: float
    bound_holds: bool
    bound_nontrivial: bool
    connected: bool
    non_bipartite: bool
    residual: float
    loops: int
    trace_error: float  # |sum(theta) - #loops|
    trace_sq_error: float  # |sum(theta^2) - n d|
    eigenvalues: tuple[float, ...] = ()

    def to_json(self, with_eigenvalues: bool = False) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        if not with_eigenvalues:
            out.pop("eigenvalues")
        else:
            out["eigenvalues"] = list(self.eigenvalues)
        return out


def certify(g: SPGraph) -> SpectralCert:
    values = eigen_spectrum(g)
    n, d = g.n, g.d
    lam = max(values[1], -values[-1]) if n > 1 else 0.0
    bound = lambda_bound(g.ring)
    tol = EIG_RTOL * d
    adj = g.matrix.astype(np.float64)
    loops = int(len(g.loops))
    return SpectralCert(
        ring=g.ring.label,
        n=n,
        d=d,
        lam=float(lam),
        bound=bound,
        bound_holds=bool(lam <= bound),
        bound_nontrivial=bool(bound < d),
        connected=bool(values[1] < d - tol),
        non_bipartite=bool(values[-1] > -d + tol),
        residual=g.spectrum.residual(adj),
        loops=loops,
        trace_error=float(abs(values.sum() - loops)),
        trace_sq_error=float(abs((values**2).sum() - n * d)),
        eigenvalues=tuple(float(x) for x in values),
    )


def is_connected(g: SPGraph) -> bool:
    """Breadth-first sweep over the implicit adjacency."""
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    while frontier.size:
        nxt = np.unique(g.neighbors(frontier))
        nxt = nxt[~seen[nxt]]
        seen[nxt] = True
        frontier = nxt
    return bool(seen.all())


# ---------------------------------------------------------------------------
# edge counting and the mixing inequality

# membership uses a dense bitmap up to this many vertices, binary search beyond
_BITMAP_MAX = 1 << 26


def edge_count(g: SPGraph, B, C) -> int:
    """Ordered pairs ``(u, w)`` in ``B x C`` with ``u ~ w``; a loop at ``u`` counts once.

    Walks the ``|R|`` neighbors of each vertex of the smaller set and tests
    membership in the other, so the cost is ``min(|B|, |C|) * |R|``.
    """
    b_codes = g.vertex_codes(B)
    c_codes = g.vertex_codes(C)
    if not b_codes.size or not c_codes.size:
        return 0
    # e(B, C) = e(C, B) by symmetry of the relation
    walk, member = (b_codes, c_codes) if b_codes.size <= c_codes.size else (c_codes, b_codes)
    if g.n <= _BITMAP_MAX:
        bitmap = np.zeros(g.n, dtype=bool)
        bitmap[member] = True
        contains = bitmap.__getitem__
    else:

        def contains(x):
            idx = np.searchsorted(member, x).clip(max=member.size - 1)
            return member[idx] == x

    total = 0
    step = max(1, (1 << 20) // g.order)
    for lo in range(0, walk.size, step):
        total += int(contains(g.neighbors(walk[lo : lo + step])).sum())
    return total


def edge_count_bruteforce(g: SPGraph, B, C) -> int:
    """Direct ``|B| x |C|`` scan of the edge relation."""
    b_codes = g.vertex_codes(B)
    c_codes = g.vertex_codes(C)
    if not b_codes.size or not c_codes.size:
        return 0
    return int(g.adjacent_codes(b_codes[:, None], c_codes[None, :]).sum())


def mixing_terms(g: SPGraph, lam: float, B, C) -> tuple[float, float]:
    """``(|e(B,C) - d|B||C|/n|, lam * sqrt(|B||C|))``."""
    nb, nc = len(g.vertex_codes(B)), len(g.vertex_codes(C))
    e = edge_count(g, B, C)
    return abs(e - g.d * nb * nc / g.n), lam * math.sqrt(nb * nc)


def mixing_check(g: SPGraph, cert: SpectralCert | float, B, C) -> bool:
    lam = cert.lam if isinstance(cert, SpectralCert) else float(cert)
    lhs, rhs = mixing_terms(g, lam, B, C)
    # slack for floating error in the computed eigenvalue
    return lhs <= rhs * (1 + EIG_RTOL) + 1e-9
