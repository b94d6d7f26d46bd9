"""Vertex-set constructions behind the expansion theorems and their exact checks.

Each theorem maps a triple ``(x, y, z)`` in ``A x B x C`` to an edge ``(s, t)`` of
the sum-product graph with ``s`` in S and ``t`` in T.  At most ``m`` triples share
an edge (``m`` is a multiplicity measured from the function tables), so
``m * e(S, T) >= |A||B||C|``.  The expander mixing lemma bounds ``e(S, T)`` from
above, and comparing the two gives the expansion estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import MATERIALIZED, SPGraph, certify, edge_count, lambda_bound
from .rings import RingSpec, _check_same
from .sets import (
    F1,
    F2,
    F3,
    DomainError,
    ElemSet,
    FuncTable,
    apply_f,
    g2_id,
    geometric,
    identity,
    max_translate_multiplicity,
    multiplicity,
    product,
    product_set,
    ratio_value_count,
    sum_set,
    unit_generator,
)

T_MULT = "T-mult"
T_ADD = "T-add"
T_THREE = "T-three-sets"
T_SPECIAL = "T-special"
THEOREMS = (T_MULT, T_ADD, T_THREE, T_SPECIAL)

# the map f each theorem bounds
FORM = {T_MULT: F1, T_ADD: F1, T_THREE: F2, T_SPECIAL: F3}


class ChainViolation(AssertionError):
    pass


@dataclass
class ProofConstruction:
    theorem: str
    ring: RingSpec
    S: np.ndarray  # sorted vertex codes
    T: np.ndarray
    m: int
    triples: int
    # one (s, t) vertex-code pair per triple, in A x B x C order
    witness: np.ndarray
    cap_S: int
    cap_T: int
    # T-three-sets only: does the printed T coordinate agree with its simplification
    printed_matches_simplified: bool | None = None
    hypothesis: dict = field(default_factory=dict)

    @property
    def distinct_witness_edges(self) -> int:
        return len(np.unique(self.witness[:, 0] * self.ring.order**2 + self.witness[:, 1]))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _check_inputs(theorem: str, g: FuncTable, h: FuncTable | None, A, B, C) -> None:
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}")
    ring = g.ring
    for s in (A, B, C):
        _check_same(ring, s.ring)
        _require(len(s) > 0, "A, B and C must be nonempty")
    _require(B.all_units() and C.all_units(), "B and C must consist of units")
    _require(A.all_units(), "A must consist of units")
    _require(g.covers(A), f"A is not inside the domain of {g.name}")
    if theorem in (T_MULT, T_ADD, T_THREE):
        _require(h is not None, f"{theorem} needs h")
        _check_same(ring, h.ring)
    if theorem in (T_MULT, T_ADD):
        _require(h.covers(A), f"A is not inside the domain of {h.name}")
    if theorem == T_THREE:
        G = g.domain
        _require(h.domain.codes == G.codes, "g and h must share the subgroup domain")
        _require(product_set(G, G).codes == G.codes, "the domain of g and h must be a subgroup")
        _require(B.issubset(G) and C.issubset(G), "A, B, C must lie in the subgroup G")


def theorem_multiplicity(theorem: str, g: FuncTable, h: FuncTable | None) -> int:
    """The multiplicity bounding how many triples share an edge."""
    if theorem == T_MULT:
        return multiplicity(product(g, h))
    if theorem == T_ADD:
        return multiplicity(g)
    if theorem == T_THREE:
        return max_translate_multiplicity(g, h)
    if theorem == T_SPECIAL:
        return multiplicity(g2_id(g))
    raise ValueError(f"unknown theorem {theorem!r}")


def construct_ST(theorem: str, g: FuncTable, h: FuncTable | None, A: ElemSet, B: ElemSet, C: ElemSet) -> ProofConstruction:
    _check_inputs(theorem, g, h, A, B, C)
    ring = g.ring
    add, sub, mul, inv = ring.add_code, ring.sub_code, ring.mul_code, ring.inverse_code
    order = ring.order
    gv = g.code_at
    hv = h.code_at if h is not None else None
    nA, nB, nC = len(A), len(B), len(C)
    abc = nA * nB * nC

    def vert(a: int, b: int) -> int:
        return a * order + b

    witness = np.empty((abc, 2), dtype=np.int64)
    agree = True
    i = 0
    for x in A.codes:
        gx = gv(x)
        gx_inv = inv(gx)
        for y in B.codes:
            for z in C.codes:
                if theorem == T_MULT:
                    hx = hv(x)
                    s = vert(mul(z, hx), mul(z, gx_inv))
                    t = vert(mul(y, z), mul(gx, add(hx, y)))
                elif theorem == T_ADD:
                    hx = hv(x)
                    s = vert(add(y, z), mul(gx, add(hx, y)))
                    t = vert(sub(hx, z), gx_inv)
                elif theorem == T_THREE:
                    hy, yz, xz = hv(y), mul(y, z), mul(x, z)
                    hyz, gxz = hv(yz), gv(xz)
                    fxy = mul(mul(gx, hy), add(x, y))
                    s = vert(yz, mul(fxy, inv(hyz)))
                    printed = mul(mul(mul(mul(mul(z, gxz), hyz), gx_inv), inv(hy)), inv(gxz))
                    simplified = mul(mul(z, hyz), inv(mul(gx, hy)))
                    agree = agree and printed == simplified
                    t = vert(xz, printed)
                else:
                    yz = mul(y, z)
                    fxy = mul(mul(x, y), add(gx, y))
                    s = vert(yz, mul(fxy, inv(yz)))
                    t = vert(mul(z, gx), mul(mul(z, z), inv(x)))
                witness[i] = (s, t)
                i += 1

    S = np.unique(witness[:, 0])
    T = np.unique(witness[:, 1])
    f_size = len(apply_f(FORM[theorem], g, h, A, B))
    hypothesis: dict = {}
    if theorem == T_MULT:
        cap_S, cap_T = nA * nC, min(abc, f_size * len(product_set(B, C)))
    elif theorem == T_ADD:
        cap_S, cap_T = min(abc, f_size * len(sum_set(B, C))), nA * nC
    elif theorem == T_THREE:
        k_g, k_h = ratio_value_count(g), ratio_value_count(h)
        hypothesis = {"g_ratio_values": k_g, "h_ratio_values": k_h, "domain_size": len(g.domain)}
        cap_S = min(abc, f_size * len(product_set(B, C)))
        cap_T = min(abc, len(product_set(A, C)) * nC * k_h)
    else:
        cap_S, cap_T = min(abc, f_size * len(product_set(B, C))), nA * nC
    if len(S) > cap_S or len(T) > cap_T:
        raise AssertionError(f"{theorem}: |S|={len(S)}, |T|={len(T)} exceed caps {cap_S}, {cap_T}")
    return ProofConstruction(
        theorem=theorem,
        ring=ring,
        S=S,
        T=T,
        m=theorem_multiplicity(theorem, g, h),
        triples=abc,
        witness=witness,
        cap_S=cap_S,
        cap_T=cap_T,
        printed_matches_simplified=agree if theorem == T_THREE else None,
        hypothesis=hypothesis,
    )


@dataclass
class EdgeBound:
    e_ST: int
    m: int
    triples: int
    witness_edges_ok: bool  # every witness pair is an edge
    distinct_witness_edges: int

    @property
    def holds(self) -> bool:
        return self.e_ST * self.m >= self.triples

    @property
    def lower_bound(self) -> Fraction:
        return Fraction(self.triples, self.m)


def verify_edge_lower_bound(pc: ProofConstruction, graph: SPGraph, strict: bool = True) -> EdgeBound:
    """Exact check of ``m * e(S, T) >= |A||B||C|``."""
    _check_same(pc.ring, graph.ring)
    e = edge_count(graph, pc.S, pc.T)
    witness_ok = bool(graph.adjacent_codes(pc.witness[:, 0], pc.witness[:, 1]).all())
    out = EdgeBound(e, pc.m, pc.triples, witness_ok, pc.distinct_witness_edges)
    if strict and not (out.holds and witness_ok):
        raise ChainViolation(
            f"{pc.theorem} on {pc.ring}: e(S,T)={e}, m={pc.m}, |A||B||C|={pc.triples}, "
            f"witness edges ok={witness_ok}; S={pc.S.tolist()} T={pc.T.tolist()}"
        )
    return out


# ---------------------------------------------------------------------------


@dataclass
class ExpansionReport:
    ring: str
    theorem: str
    q: int
    r: int
    size_A: int
    size_B: int
    size_C: int
    m: int
    f_size: int
    bc_size: int  # |B.C|, or |B+C| for T-add
    ac_size: int | None  # |A.C| (T-three-sets only)
    e_ST: int
    S_size: int
    T_size: int
    lam: float
    lambda_source: str  # "spectrum" or "bound"
    lower_bound: Fraction
    mixing_upper: float
    chain_ok: bool
    lhs_product: int
    explicit_rhs: Fraction
    explicit_ok: bool
    delta_emp: float | None
    hypothesis: dict = field(default_factory=dict)
    printed_matches_simplified: bool | None = None
    seed: int | None = None

    CSV_COLUMNS = (
        "ring", "theorem", "seed", "A_size", "B_size", "C_size", "m", "f_size",
        "BC_size", "e_ST", "S_size", "T_size", "lambda", "chain_ok", "explicit_ok", "delta_emp",
    )

    def csv_row(self) -> list[str]:
        return [
            self.ring, self.theorem, "" if self.seed is None else str(self.seed),
            str(self.size_A), str(self.size_B), str(self.size_C), str(self.m), str(self.f_size),
            str(self.bc_size), str(self.e_ST), str(self.S_size), str(self.T_size),
            f"{self.lam:.10f}", str(self.chain_ok).lower(), str(self.explicit_ok).lower(),
            "" if self.delta_emp is None else f"{self.delta_emp:.10f}",
        ]

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["lambda"] = out.pop("lam")
        out["lower_bound"] = str(self.lower_bound)
        out["explicit_rhs"] = str(self.explicit_rhs)
        out["explicit_rhs_float"] = float(self.explicit_rhs)
        return out


def explicit_rhs(ring: RingSpec, triples: int, m: int) -> Fraction:
    """``min(q^r X / 2, X^2 / (8 r q^(2r-1)))`` with ``X = triples / m``.

    If ``X <= |S||T|/q^r + L sqrt(|S||T|)`` then one of the two terms on the right
    is at least ``X/2``; each case solves to one branch of the minimum.
    """
    x = Fraction(triples, m)
    q, r = ring.q, ring.r
    return min(q**r * x / 2, x * x / (8 * r * q ** (2 * r - 1)))


def _lambda_for(graph: SPGraph, lam: float | None) -> tuple[float, str]:
    if lam is not None:
        return float(lam), "spectrum"
    if graph.mode == MATERIALIZED:
        return certify(graph).lam, "spectrum"
    return lambda_bound(graph.ring), "bound"


def evaluate_theorem(
    theorem: str,
    g: FuncTable,
    h: FuncTable | None,
    A: ElemSet,
    B: ElemSet,
    C: ElemSet,
    graph: SPGraph,
    lam: float | None = None,
    strict: bool = True,
) -> ExpansionReport:
    """Run one theorem instance end to end.

    ``chain_ok`` is the exact chain ``|A||B||C|/m <= e(S,T) <= |S||T|/q^r +
    lam sqrt(|S||T|)`` with ``lam`` the computed second eigenvalue (the structural
    bound is used only when the graph is not materialized and no ``lam`` is
    given).  ``explicit_ok`` compares the theorem's left-hand side against the
    constants ``1/2`` and ``1/(8r)`` obtained by solving the chain, divided by
    the construction's cap on the other set.
    """
    ring = graph.ring
    pc = construct_ST(theorem, g, h, A, B, C)
    bound = verify_edge_lower_bound(pc, graph, strict=False)
    lam_val, source = _lambda_for(graph, lam)

    nS, nT = len(pc.S), len(pc.T)
    upper = nS * nT / ring.order + lam_val * math.sqrt(nS * nT)
    chain_ok = bound.holds and bound.witness_edges_ok and bound.e_ST <= upper * (1 + 1e-12) + 1e-9

    f_size = len(apply_f(FORM[theorem], g, h, A, B))
    ac_size = None
    if theorem == T_ADD:
        bc_size = len(sum_set(B, C))
    else:
        bc_size = len(product_set(B, C))
    nA, nB, nC = len(A), len(B), len(C)
    if theorem == T_THREE:
        ac_size = len(product_set(A, C))
        terms = (f_size, ac_size, bc_size)
        other_cap = nC * pc.hypothesis["h_ratio_values"]
    else:
        terms = (f_size, bc_size)
        other_cap = nA * nC
    lhs = math.prod(terms)
    rhs = explicit_rhs(ring, pc.triples, pc.m)
    explicit_ok = lhs * other_cap >= rhs

    delta = None
    if nA == nB and nA > 1:
        delta = math.log(max(terms)) / math.log(nA) - 1

    report = ExpansionReport(
        ring=ring.label,
        theorem=theorem,
        q=ring.q,
        r=ring.r,
        size_A=nA,
        size_B=nB,
        size_C=nC,
        m=pc.m,
        f_size=f_size,
        bc_size=bc_size,
        ac_size=ac_size,
        e_ST=bound.e_ST,
        S_size=nS,
        T_size=nT,
        lam=lam_val,
        lambda_source=source,
        lower_bound=bound.lower_bound,
        mixing_upper=upper,
        chain_ok=bool(chain_ok),
        lhs_product=lhs,
        explicit_rhs=rhs,
        explicit_ok=bool(explicit_ok),
        delta_emp=delta,
        hypothesis=pc.hypothesis,
        printed_matches_simplified=pc.printed_matches_simplified,
    )
    if strict and not chain_ok:
        raise ChainViolation(f"proof chain failed: {report.to_json()}")
    return report


# ---------------------------------------------------------------------------
# prime-field checks


@dataclass
class VinhResult:
    size: int
    sum_size: int
    product_size: int
    q: int
    holds: bool
    slack: float  # right side minus left side


def vinh_field_check(A: ElemSet) -> VinhResult:
    """``|A|^2 <= mn|A|/q + sqrt(q m n)`` with ``m = |A+A|``, ``n = |A.A|``; decided exactly."""
    ring = A.ring
    if ring.r != 1:
        raise ValueError("the field inequality needs r = 1")
    size, q = len(A), ring.q
    m, n = len(sum_set(A, A)), len(product_set(A, A))
    gap = Fraction(size * size) - Fraction(m * n * size, q)
    holds = gap <= 0 or gap * gap <= q * m * n
    slack = m * n * size / q + math.sqrt(q * m * n) - size * size
    return VinhResult(size, m, n, q, bool(holds), slack)


@dataclass
class SharpnessReport:
    ring: str
    base: int
    length: int
    size: int
    f_size: int
    product_size: int
    ratio: Fraction  # |f(A,A)| |A.A| / (p |A|)

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["ratio"] = str(self.ratio)
        out["ratio_float"] = float(self.ratio)
        return out


def sharpness_probe(spec: RingSpec, length: int, base=None) -> SharpnessReport:
    """Measure ``|f(A,A)| |A.A| / (p |A|)`` for ``f = xy(x+y)`` on a geometric progression."""
    if spec.r != 1:
        raise ValueError("the sharpness probe runs over prime fields (r = 1)")
    if length < 1:
        raise ValueError("progression length must be >= 1")
    b = spec(base) if base is not None else unit_generator(spec)
    A = geometric(spec, b, length)
    if len(A) < length:
        raise ValueError(f"progression with base {b} repeats before length {length}")
    f_size = len(apply_f(F3, identity(A), None, A, A))
    aa = len(product_set(A, A))
    return SharpnessReport(spec.label, b.code, length, len(A), f_size, aa, Fraction(f_size * aa, spec.q * len(A)))
