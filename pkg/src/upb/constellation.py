"""Unitary constellations: diversity metrics, baselines, serialization.

A constellation is a finite set of m >= 2 distinct elements of U(n). Its
diversity sum is min ||A - B|| / (2 sqrt(n)) over pairs, its diversity
product min |det(A - B)|^(1/n) / 2; both lie in [0, 1] and the product never
exceeds the sum.
"""

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, ParseError, ValidationError
from .matrices import UnitaryMatrix, stacked_logabsdet, unitary_eigenangles

__all__ = [
    "Constellation",
    "DiversitySummary",
    "chordal_packing_radius",
    "diversity_product",
    "diversity_sum",
    "diversity_summary",
    "load_constellation",
    "random_search",
    "riemannian_distance",
    "save_constellation",
]

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class Constellation:
    """m >= 2 pairwise-distinct unitaries of a common dimension n.

    ``members`` may be given as UnitaryMatrix instances or raw arrays; raw
    arrays are validated on construction.
    """

    members: tuple
    label: str = ""

    def __post_init__(self):
        members = tuple(
            u if isinstance(u, UnitaryMatrix) else UnitaryMatrix(u) for u in self.members
        )
        if len(members) < 2:
            raise ValidationError(f"constellation needs at least 2 members, got {len(members)}")
        n = members[0].n
        for i, u in enumerate(members):
            if u.n != n:
                raise ValidationError(f"matrix {i} has dimension {u.n}, expected {n}")
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if np.max(np.abs(members[i].array - members[j].array)) <= 1e-12:
                    raise ValidationError(f"matrices {i} and {j} are equal within 1e-12")
        object.__setattr__(self, "members", members)

    @property
    def n(self):
        return self.members[0].n

    @property
    def m(self):
        return len(self.members)


@dataclass(frozen=True)
class DiversitySummary:
    n: int
    m: int
    diversity_sum: float
    sum_pair: tuple
    diversity_product: float
    product_pair: tuple


def _pair_arrays(v):
    stack = np.stack([u.array for u in v.members])
    pairs = list(itertools.combinations(range(v.m), 2))
    i_idx = np.array([p[0] for p in pairs])
    j_idx = np.array([p[1] for p in pairs])
    return stack[i_idx] - stack[j_idx], pairs


def _sum_values(diffs, n):
    norms = np.sqrt(np.sum(np.abs(diffs) ** 2, axis=(-2, -1)))
    return norms / (2.0 * math.sqrt(n))


def _product_values(diffs, n):
    logabs = stacked_logabsdet(diffs)
    with np.errstate(over="ignore"):
        vals = 0.5 * np.exp(logabs / n)  # exp(-inf) = 0 for singular differences
    return vals


def diversity_summary(v):
    """Both diversity metrics of a Constellation with their minimizing pairs."""
    diffs, pairs = _pair_arrays(v)
    sums = _sum_values(diffs, v.n)
    prods = _product_values(diffs, v.n)
    i_s = int(np.argmin(sums))
    i_p = int(np.argmin(prods))
    return DiversitySummary(
        n=v.n,
        m=v.m,
        diversity_sum=float(sums[i_s]),
        sum_pair=pairs[i_s],
        diversity_product=float(prods[i_p]),
        product_pair=pairs[i_p],
    )


def diversity_sum(v):
    """min ||A - B|| / (2 sqrt(n)) over member pairs, in [0, 1]."""
    diffs, _ = _pair_arrays(v)
    return float(np.min(_sum_values(diffs, v.n)))


def diversity_product(v):
    """min |det(A - B)|^(1/n) / 2 over member pairs, in [0, 1].

    Zero exactly when some pair difference is singular; the constellation is
    fully diverse iff the value is positive.
    """
    diffs, _ = _pair_arrays(v)
    return float(np.min(_product_values(diffs, v.n)))


def riemannian_distance(a, b):
    """Geodesic distance sqrt(sum theta_j^2) of the eigenangles of A* B."""
    aa = a.array if isinstance(a, UnitaryMatrix) else np.asarray(a, dtype=complex)
    bb = b.array if isinstance(b, UnitaryMatrix) else np.asarray(b, dtype=complex)
    if aa.shape != bb.shape:
        raise DimensionError(f"dimension mismatch: {aa.shape} vs {bb.shape}")
    theta = unitary_eigenangles(aa.conj().T @ bb)
    return float(np.sqrt(np.sum(theta * theta)))


def chordal_packing_radius(v):
    """Largest r with pairwise-disjoint chordal balls: from the minimal
    distance d, the smaller root of 2 sqrt(r^2 - r^4/(4n)) = d."""
    n = v.n
    d = 2.0 * math.sqrt(n) * diversity_sum(v)
    inner = max(0.0, 1.0 - d * d / (4.0 * n))
    return math.sqrt(2.0 * n * max(0.0, 1.0 - math.sqrt(inner)))


def random_search(n, m, trials, seed, objective="sum"):
    """Best of ``trials`` Haar-sampled constellations under an objective.

    objective is "sum" or "product". Deterministic given seed (any chunking
    is invisible: draws come from one sequential stream). Returns
    (Constellation, score).
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"dimension must be a positive integer, got {n!r}")
    if not isinstance(m, int) or m < 2:
        raise ValidationError(f"constellation size m must be an integer >= 2, got {m!r}")
    if not isinstance(trials, int) or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    if objective not in ("sum", "product"):
        raise ValidationError(f"objective must be 'sum' or 'product', got {objective!r}")
    rng = np.random.default_rng(
        seed if isinstance(seed, np.random.Generator) else (int(seed) & _SEED_MASK)
    )
    pairs = list(itertools.combinations(range(m), 2))
    i_idx = np.array([p[0] for p in pairs])
    j_idx = np.array([p[1] for p in pairs])
    best_score = -1.0
    best = None
    chunk = max(1, 2048 // max(1, m))
    done = 0
    while done < trials:
        take = min(chunk, trials - done)
        z = (
            rng.standard_normal((take, m, n, n)) + 1j * rng.standard_normal((take, m, n, n))
        ) / math.sqrt(2.0)
        q, r = np.linalg.qr(z)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        absd = np.abs(d)
        phase = np.where(absd > 0, d, 1.0) / np.where(absd > 0, absd, 1.0)
        q = q * phase[..., None, :]
        diffs = q[:, i_idx] - q[:, j_idx]
        if objective == "sum":
            scores = np.min(_sum_values(diffs, n), axis=1)
        else:
            scores = np.min(_product_values(diffs.reshape(-1, n, n), n).reshape(take, -1), axis=1)
        k = int(np.argmax(scores))
        if scores[k] > best_score:
            best_score = float(scores[k])
            best = q[k].copy()
        done += take
    members = tuple(UnitaryMatrix(best[i]) for i in range(m))
    return Constellation(members, label=f"random-search-{objective}"), best_score


def _fmt(x):
    return format(float(x), ".17g")


def save_constellation(v, path):
    """Write a constellation as JSON: keys n, label (if set), matrices, in
    that order; entries as [re, im] pairs at 17 significant digits."""
    out = ["{"]
    out.append(f'  "n": {v.n},')
    if v.label:
        out.append(f'  "label": {json.dumps(v.label)},')
    out.append('  "matrices": [')
    mats = []
    for u in v.members:
        rows = ",\n      ".join(
            "[" + ", ".join(f"[{_fmt(e.real)}, {_fmt(e.imag)}]" for e in row) + "]"
            for row in u.array
        )
        mats.append("    [\n      " + rows + "\n    ]")
    out.append(",\n".join(mats))
    out.append("  ]")
    out.append("}")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def load_constellation(path):
    """Read a constellation file, validating structure, dimension homogeneity,
    and unitarity; errors name the offending matrix index."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"expected a JSON object at top level, got {type(data).__name__}")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"field 'n' must be a positive integer, got {n!r}")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise ParseError(f"field 'label' must be a string, got {label!r}")
    mats = data.get("matrices")
    if not isinstance(mats, list) or len(mats) < 2:
        raise ParseError("field 'matrices' must be a list of at least 2 matrices")
    members = []
    for idx, mat in enumerate(mats):
        arr = _parse_matrix(mat, idx)
        if arr.shape != (n, n):
            raise ValidationError(
                f"matrix {idx} has shape {arr.shape[0]}x{arr.shape[1]}, expected {n}x{n}"
            )
        try:
            members.append(UnitaryMatrix(arr))
        except (ValidationError, DimensionError) as exc:
            raise ValidationError(f"matrix {idx}: {exc}") from exc
    try:
        return Constellation(tuple(members), label=label)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _parse_matrix(mat, idx):
    if not isinstance(mat, list) or not mat:
        raise ParseError(f"matrix {idx} must be a nonempty list of rows")
    rows = []
    width = None
    for r, row in enumerate(mat):
        if not isinstance(row, list) or (width is not None and len(row) != width):
            raise ParseError(f"matrix {idx} row {r} is malformed")
        width = len(row)
        entries = []
        for e in row:
            if (
                not isinstance(e, list)
                or len(e) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in e)
                or not all(math.isfinite(x) for x in e)
            ):
                raise ParseError(f"matrix {idx} row {r} has a malformed entry: {e!r}")
            entries.append(complex(e[0], e[1]))
        rows.append(entries)
    return np.array(rows, dtype=complex)
