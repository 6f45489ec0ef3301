"""Multi-index sets selecting column subsets of Kronecker product matrices.

A multi-index set is a finite collection of D-dimensional indices with all
entries >= 1.  The sets built here (weighted l^p balls centered at the
all-ones index, hyperbolic crosses, explicit lists) identify which columns
of a D-fold Kronecker product matrix enter a least squares problem.  The
fast sampling algorithms downstream require the set to be *monotone lower*:
closed under componentwise decrease toward the all-ones index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

__all__ = [
    "IndexSetSpec",
    "MultiIndexSet",
    "build_index_set",
    "is_monotone_lower",
    "bounding_box",
    "canonicalize_to_lower",
    "apply_permutation",
    "invert_permutation",
    "linear_index",
    "lexicographic_column_index",
    "spec_from_json",
    "spec_to_json",
]

FAMILIES = ("wlp-ball", "hyperbolic-cross", "explicit-list")


@dataclass(frozen=True)
class IndexSetSpec:
    """Parameters identifying a multi-index set family.

    ``order`` is the ball radius G >= 0, ``p`` the exponent in [0, inf],
    and ``weights`` a vector in (0,1]^D with max weight equal to 1.
    For ``family="explicit-list"`` the indices are given directly and the
    other shape parameters are ignored.
    """

    dimension: int
    family: str
    order: float = 0.0
    p: float = 1.0
    weights: tuple[float, ...] = ()
    indices: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "explicit-list":
            if not self.indices:
                raise ValueError("explicit-list requires a nonempty indices list")
            for alpha in self.indices:
                if len(alpha) != self.dimension or any(a < 1 for a in alpha):
                    raise ValueError(f"bad multi-index {alpha}: need {self.dimension} entries, all >= 1")
            return
        if not math.isfinite(self.order) or self.order < 0:
            raise ValueError("order must be finite and >= 0")
        if math.isnan(self.p) or self.p < 0:
            raise ValueError("p must be in {0} U (0, inf) U {inf}")
        weights = self.weights if self.weights else (1.0,) * self.dimension
        object.__setattr__(self, "weights", tuple(float(w) for w in weights))
        if len(self.weights) != self.dimension:
            raise ValueError("weights length must equal dimension")
        if any(not (0.0 < w <= 1.0) or not math.isfinite(w) for w in self.weights):
            raise ValueError("weights must lie in (0, 1]")
        if max(self.weights) != 1.0:
            raise ValueError("at least one weight must equal 1")


@dataclass(frozen=True)
class MultiIndexSet:
    """Ordered finite set of distinct multi-indices with its bounding box.

    The ordering is graded-lexicographic: sorted by sum(alpha - 1) with
    lexicographic tie-breaking (dimension 1 most significant).  This makes
    the column order of the associated design matrix deterministic.
    """

    dimension: int
    indices: tuple[tuple[int, ...], ...]
    bounding_box: tuple[int, ...] = field(init=False)
    _positions: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.indices:
            raise ValueError("multi-index set must be nonempty")
        seen = set()
        for alpha in self.indices:
            if len(alpha) != self.dimension:
                raise ValueError(f"index {alpha} has wrong dimension")
            if any(a < 1 for a in alpha):
                raise ValueError(f"index {alpha} has entries < 1")
            if alpha in seen:
                raise ValueError(f"duplicate index {alpha}")
            seen.add(alpha)
        box = tuple(max(alpha[d] for alpha in self.indices) for d in range(self.dimension))
        object.__setattr__(self, "bounding_box", box)
        object.__setattr__(self, "_positions", {a: i for i, a in enumerate(self.indices)})

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, alpha):
        return tuple(alpha) in self._positions


def _graded_lex_sorted(indices) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(indices, key=lambda a: (sum(a) - len(a), a)))


def _wlp_ball(dimension: int, order: float, p: float, weights) -> list[tuple[int, ...]]:
    G = Fraction(order)
    wfrac = [Fraction(w) for w in weights]
    if p == 0:
        # ||alpha - 1||_0 counts entries != 1, which does not bound the
        # entries themselves: the ball is infinite once G >= 1.
        if G >= 1:
            raise ValueError("the 1-centered l^0 ball is infinite for order >= 1")
        return [(1,) * dimension]
    # Entrywise bound (alpha_d - 1)/w_d <= G holds for every 0 < p <= inf;
    # exact rational caps keep boundary indices from floating-point loss.
    caps = [int(G * w) + 1 for w in wfrac]
    out = []
    if p == 1:
        for alpha in product(*(range(1, c + 1) for c in caps)):
            if sum((a - 1) / w for a, w in zip(alpha, wfrac)) <= G:
                out.append(alpha)
    elif math.isinf(p):
        # The entrywise cap is exactly the membership test.
        out = list(product(*(range(1, c + 1) for c in caps)))
    else:
        Gp = float(order) ** p
        for alpha in product(*(range(1, c + 1) for c in caps)):
            if sum(((a - 1) / w) ** p for a, w in zip(alpha, weights)) <= Gp:
                out.append(alpha)
    return out


def _hyperbolic_cross(dimension: int, order: float, weights) -> list[tuple[int, ...]]:
    # ||log alpha||_{w,1} <= log(G+1), i.e. prod alpha_d^(1/w_d) <= G+1.
    bound = order + 1.0
    caps = [int(math.floor(bound ** w)) for w in weights]
    exact = all(w == 1.0 for w in weights)
    out = []
    for alpha in product(*(range(1, max(c, 1) + 1) for c in caps)):
        if exact:
            # int-vs-float comparison is exact in Python
            ok = math.prod(alpha) <= bound
        else:
            ok = sum(math.log(a) / w for a, w in zip(alpha, weights)) <= math.log(bound)
        if ok:
            out.append(alpha)
    return out


def build_index_set(spec: IndexSetSpec) -> MultiIndexSet:
    """Construct the multi-index set described by ``spec``.

    Membership comparisons are exact (rational arithmetic) for the common
    cases p in {1, inf} and for unit-weight hyperbolic crosses, so boundary
    indices are never lost to floating-point roundoff.
    """
    if spec.family == "explicit-list":
        members = list(spec.indices)
    elif spec.family == "wlp-ball":
        members = _wlp_ball(spec.dimension, spec.order, spec.p, spec.weights)
    else:
        members = _hyperbolic_cross(spec.dimension, spec.order, spec.weights)
    return MultiIndexSet(spec.dimension, _graded_lex_sorted(members))


def is_monotone_lower(index_set: MultiIndexSet) -> bool:
    """True iff the set is closed under componentwise decrease toward all-ones.

    Checks only the immediate lower neighbours alpha - e_d; this is
    equivalent to the full definition (any beta <= alpha is reachable by a
    chain of single-entry decrements staying inside the set).
    """
    members = index_set._positions
    for alpha in index_set.indices:
        for d, a in enumerate(alpha):
            if a > 1:
                beta = alpha[:d] + (a - 1,) + alpha[d + 1:]
                if beta not in members:
                    return False
    return True


def bounding_box(index_set: MultiIndexSet) -> tuple[int, ...]:
    """Componentwise maximum over the set members."""
    return index_set.bounding_box


def apply_permutation(perms: Sequence[Sequence[int]], index_set: MultiIndexSet) -> MultiIndexSet:
    """Relabel entries dimensionwise: alpha_d -> perms[d][alpha_d - 1]."""
    mapped = [tuple(perms[d][a - 1] for d, a in enumerate(alpha)) for alpha in index_set.indices]
    return MultiIndexSet(index_set.dimension, _graded_lex_sorted(mapped))


def invert_permutation(perms: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    out = []
    for perm in perms:
        inv = [0] * len(perm)
        for old, new in enumerate(perm, start=1):
            inv[new - 1] = old
        out.append(tuple(inv))
    return tuple(out)


def canonicalize_to_lower(
    index_set: MultiIndexSet,
) -> Optional[tuple[tuple[tuple[int, ...], ...], MultiIndexSet]]:
    """Search for dimensionwise permutations making the set monotone lower.

    Heuristic: in each dimension, relabel values in decreasing order of how
    often they occur in the set (ties broken by the original value), then
    verify the relabeled set.  Returns ``(perms, permuted_set)`` where
    ``perms[d][old_value - 1]`` is the new value, or ``None`` if the
    heuristic finds no certifying permutation.  Success is always sound
    (the result is verified); failure does not prove that no permutation
    exists.
    """
    D = index_set.dimension
    perms = []
    for d in range(D):
        top = index_set.bounding_box[d]
        counts = [0] * top
        for alpha in index_set.indices:
            counts[alpha[d] - 1] += 1
        ranked = sorted(range(1, top + 1), key=lambda v: (-counts[v - 1], v))
        perm = [0] * top
        for new_value, old_value in enumerate(ranked, start=1):
            perm[old_value - 1] = new_value
        perms.append(tuple(perm))
    permuted = apply_permutation(perms, index_set)
    if not is_monotone_lower(permuted):
        return None
    return tuple(perms), permuted


def linear_index(index_set: MultiIndexSet, alpha) -> int:
    """1-based position of ``alpha`` in the set's deterministic ordering."""
    alpha = tuple(alpha)
    try:
        return index_set._positions[alpha] + 1
    except KeyError:
        raise ValueError(f"{alpha} is not a member of the index set") from None


def lexicographic_column_index(bold_n: Sequence[int], alpha) -> int:
    """1-based column number of ``alpha`` in the Kronecker product ordering.

    Dimension 1 varies slowest, matching A^(1) x ... x A^(D) column
    numbering over the box [N_1] x ... x [N_D].
    """
    alpha = tuple(alpha)
    if len(alpha) != len(bold_n):
        raise ValueError("alpha and bounding box dimensions differ")
    pos = 0
    for a, n in zip(alpha, bold_n):
        if not 1 <= a <= n:
            raise ValueError(f"index {alpha} outside the box {tuple(bold_n)}")
        pos = pos * n + (a - 1)
    return pos + 1


def spec_from_json(obj) -> IndexSetSpec:
    """Parse an IndexSetSpec from a JSON object or string (strict keys)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise ValueError("index set spec must be a JSON object")
    family = obj.get("family")
    if family == "explicit-list":
        allowed = {"family", "indices", "dimension"}
    else:
        allowed = {"family", "dimension", "p", "order", "weights"}
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown index set spec keys: {sorted(unknown)}")
    if family == "explicit-list":
        indices = tuple(tuple(int(a) for a in alpha) for alpha in obj["indices"])
        dimension = int(obj.get("dimension", len(indices[0]) if indices else 0))
        return IndexSetSpec(dimension=dimension, family="explicit-list", indices=indices)
    for key in ("dimension", "family", "order"):
        if key not in obj:
            raise ValueError(f"index set spec missing required key {key!r}")
    p = obj.get("p", 1.0)
    p = math.inf if p in ("inf", "Infinity") else float(p)
    weights = tuple(float(w) for w in obj.get("weights", [1.0] * int(obj["dimension"])))
    return IndexSetSpec(
        dimension=int(obj["dimension"]),
        family=str(family),
        order=float(obj["order"]),
        p=p,
        weights=weights,
    )


def spec_to_json(spec: IndexSetSpec) -> dict:
    if spec.family == "explicit-list":
        return {"family": "explicit-list", "dimension": spec.dimension,
                "indices": [list(a) for a in spec.indices]}
    p = "inf" if math.isinf(spec.p) else spec.p
    return {"dimension": spec.dimension, "family": spec.family, "p": p,
            "order": spec.order, "weights": list(spec.weights)}
