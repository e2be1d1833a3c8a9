"""Bit-level automorphisms ``[i, j] -> [sigma(i), j*2^l + a_i]`` of RS binary images.

A :class:`Permutation` stores ``sigma`` in 0-based one-line form
(``sigma[i]`` is the image of row ``i``); cycle notation on ``1..m`` is
used for input and output.
"""

from __future__ import annotations

import itertools
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import rs_core
from .rs_core import CodeSpec, MMatrix

GROUP_SCHEMA = "rsaut.group/1"


@dataclass(frozen=True)
class Permutation:
    sigma: tuple[int, ...]
    a: tuple[int, ...]
    l: int
    n: int

    def __post_init__(self):
        m = len(self.sigma)
        if sorted(self.sigma) != list(range(m)):
            raise ValueError(f"sigma {self.sigma} is not a permutation of 0..{m - 1}")
        if len(self.a) != m:
            raise ValueError("a must have one entry per row")
        object.__setattr__(self, "a", tuple(int(v) % self.n for v in self.a))
        object.__setattr__(self, "l", int(self.l) % m)

    @property
    def m(self) -> int:
        return len(self.sigma)

    @classmethod
    def identity(cls, m: int, n: int) -> Permutation:
        return cls(tuple(range(m)), (0,) * m, 0, n)

    @classmethod
    def from_cycles(cls, cycles: str, a, l: int, n: int) -> Permutation:
        a = tuple(a)
        return cls(parse_cycles(cycles, len(a)), a, l, n)

    def index_map(self) -> np.ndarray:
        """``dst[j*m + i]`` = flattened destination of source bit ``[i, j]``."""
        return _index_map(self.sigma, self.a, self.l, self.n)

    def apply(self, v):
        return apply_permutation(self, v)

    def inverse(self) -> Permutation:
        m, n = self.m, self.n
        inv_sigma = [0] * m
        for i, s in enumerate(self.sigma):
            inv_sigma[s] = i
        l_inv = (m - self.l) % m
        mult = pow(2, l_inv, n)
        a = [(-mult * self.a[inv_sigma[t]]) % n for t in range(m)]
        return Permutation(tuple(inv_sigma), tuple(a), l_inv, n)

    def compose(self, first: Permutation) -> Permutation:
        """``self o first``: apply ``first``, then ``self``."""
        m, n = self.m, self.n
        mult = pow(2, self.l, n)
        sigma = tuple(self.sigma[first.sigma[i]] for i in range(m))
        a = tuple((mult * first.a[i] + self.a[first.sigma[i]]) % n for i in range(m))
        return Permutation(sigma, a, self.l + first.l, n)

    def shifted(self, a0: int) -> Permutation:
        return Permutation(self.sigma, tuple(v + a0 for v in self.a), self.l, self.n)

    def normalized(self) -> Permutation:
        """Representative of the global-shift class with ``a_1 = 0``."""
        return self.shifted(-self.a[0])

    def is_identity(self) -> bool:
        return self.l == 0 and self.sigma == tuple(range(self.m)) and not any(self.a)

    def cycles(self) -> str:
        return format_cycles(self.sigma)

    def to_dict(self) -> dict:
        return {
            "sigma": self.cycles(),
            "sigma_one_line": [s + 1 for s in self.sigma],
            "a": list(self.a),
            "l": self.l,
        }

    @classmethod
    def from_dict(cls, d: dict, m: int, n: int) -> Permutation:
        sig = d.get("sigma_one_line")
        if sig is not None:
            sigma = tuple(int(s) - 1 for s in sig)
        else:
            sigma = parse_cycles(d["sigma"], m)
        return cls(sigma, tuple(d["a"]), int(d.get("l", 0)), n)


@lru_cache(maxsize=4096)
def _index_map(sigma, a, l, n) -> np.ndarray:
    m = len(sigma)
    j = np.arange(n)
    mult = pow(2, l, n)
    dst = np.empty(m * n, dtype=np.int64)
    for i in range(m):
        dst[j * m + i] = ((j * mult + a[i]) % n) * m + sigma[i]
    dst.setflags(write=False)
    return dst


def parse_cycles(text: str, m: int) -> tuple[int, ...]:
    """Parse ``"(1,2)(4,5)"`` or ``"id"`` into a 0-based one-line permutation."""
    text = text.strip()
    sigma = list(range(m))
    if text in ("", "id", "()"):
        return tuple(sigma)
    if not re.fullmatch(r"(\(\s*\d+(\s*,\s*\d+)*\s*\)\s*)+", text):
        raise ValueError(f"bad cycle notation {text!r}")
    seen = set()
    for body in re.findall(r"\(([^)]*)\)", text):
        pts = [int(t) - 1 for t in body.split(",")]
        for p in pts:
            if not 0 <= p < m or p in seen:
                raise ValueError(f"bad cycle notation {text!r} for m={m}")
            seen.add(p)
        for x, y in zip(pts, pts[1:] + pts[:1]):
            sigma[x] = y
    return tuple(sigma)


def format_cycles(sigma) -> str:
    m = len(sigma)
    seen = [False] * m
    parts = []
    for start in range(m):
        if seen[start] or sigma[start] == start:
            seen[start] = True
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x + 1)
            x = sigma[x]
        parts.append("(" + ",".join(map(str, cyc)) + ")")
    return "".join(parts) or "id"


def apply_permutation(p: Permutation, v):
    """``out[sigma(i), j*2^l + a_i] = v[i, j]`` on flattened vectors.

    Works for bit and real-valued vectors, and for batches along the
    leading axes.
    """
    v = np.asarray(v)
    if v.shape[-1] != p.m * p.n:
        raise ValueError(f"vector length {v.shape[-1]} != {p.m * p.n}")
    out = np.empty_like(v)
    out[..., p.index_map()] = v
    return out


# --------------------------------------------------------------------------
# the definitive check


@lru_cache(maxsize=None)
def _check_mats(spec: CodeSpec) -> tuple[np.ndarray, np.ndarray]:
    H = rs_core.standard_parity_matrix(spec).astype(np.float32)
    G = rs_core.binary_generator_matrix(spec).astype(np.float32)
    return H, G


def _definitive_batch(spec: CodeSpec, dst_maps: np.ndarray) -> np.ndarray:
    """Vectorized definitive check for index maps of shape ``(B, m*n)``."""
    H, G = _check_mats(spec)
    dst_maps = np.atleast_2d(dst_maps)
    src = np.empty_like(dst_maps)
    rows = np.arange(dst_maps.shape[0])[:, None]
    src[rows, dst_maps] = np.arange(dst_maps.shape[1])[None, :]
    out = np.empty(len(dst_maps), dtype=bool)
    # chunk to bound memory: G is (k_bits, N)
    step = max(1, int(2e7 // G.size))
    for s in range(0, len(dst_maps), step):
        Gp = G[:, src[s:s + step]]  # (k_bits, B, N): permuted generator rows
        syn = np.einsum("rn,kbn->bkr", H, Gp, optimize=True)
        out[s:s + step] = ~(np.mod(syn, 2).astype(bool).any(axis=(1, 2)))
    return out


def is_code_automorphism(p: Permutation, spec: CodeSpec) -> bool:
    """True iff every permuted generator row has zero syndrome."""
    if p.m != spec.m or p.n != spec.n:
        raise ValueError("permutation does not match the code dimensions")
    return bool(_definitive_batch(spec, p.index_map()[None, :])[0])


def maps_codewords(p: Permutation, spec: CodeSpec, count: int, rng: np.random.Generator) -> bool:
    """Spot check: ``count`` random codewords stay codewords under ``p``."""
    G = rs_core.binary_generator_matrix(spec).astype(np.int64)
    H = rs_core.standard_parity_matrix(spec).astype(np.int64)
    msgs = rng.integers(0, 2, size=(count, G.shape[0]))
    words = (msgs @ G) % 2
    perm = apply_permutation(p, words)
    return not ((perm @ H.T) % 2).any()


# --------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class AutomorphismGroup:
    m: int
    n: int
    base_classes: tuple[Permutation, ...]

    def elements(self) -> list[Permutation]:
        """All group elements: every base class under every global shift."""
        seen = set()
        out = []
        for base in self.base_classes:
            for a0 in range(self.n):
                p = base.shifted(a0)
                key = p.index_map().tobytes()
                if key not in seen:
                    seen.add(key)
                    out.append(p)
        return out

    @property
    def order(self) -> int:
        return len(self.elements())

    def pure_shifts(self) -> list[Permutation]:
        """Elements of the form ``[i, j] -> [i, j + a]``."""
        return [p for p in self.elements()
                if p.l == 0 and p.sigma == tuple(range(self.m)) and len(set(p.a)) == 1]

    def mapping_set(self) -> set[bytes]:
        return {p.index_map().tobytes() for p in self.elements()}

    def to_dict(self, field_id: str = "") -> dict:
        return {
            "schema": GROUP_SCHEMA,
            "field": field_id or f"GF(2^{self.m})",
            "m": self.m,
            "n": self.n,
            "order": self.order,
            "classes": [p.to_dict() for p in self.base_classes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> AutomorphismGroup:
        m, n = int(d["m"]), int(d["n"])
        return cls(m, n, tuple(Permutation.from_dict(c, m, n) for c in d["classes"]))


def _sort_key(p: Permutation):
    return (p.sigma, p.l, p.a[1] if p.m > 1 else 0, p.a)


def _b_array(mm: MMatrix) -> np.ndarray:
    return np.array([[0 if v is None else v for v in row] for row in mm.b], dtype=np.int64)


def _m_invariant(b: np.ndarray, sigma, mult: int, a: np.ndarray, n: int) -> np.ndarray:
    """For candidate a-vectors (shape ``(C, m)``) test that every permuted
    M row is a cyclic shift of the M row it lands on."""
    m = b.shape[0]
    sig = np.asarray(sigma)
    bs = b[np.ix_(sig, sig)]
    # vals[c, r, k] = 2^l b[r,k] + a_k - b[s(r), s(k)]   (mod n)
    vals = (mult * b[None, :, :] + a[:, None, :] - bs[None, :, :]) % n
    off = ~np.eye(m, dtype=bool)
    # reference column per row: the first off-diagonal entry
    ref_col = np.where(np.arange(m) == 0, 1, 0)
    ref = vals[:, np.arange(m), ref_col][:, :, None]
    return ((vals == ref) | ~off[None]).all(axis=(1, 2))


def _candidates_optimized(b: np.ndarray, sigma, l: int, n: int) -> np.ndarray:
    m = b.shape[0]
    mult = pow(2, l, n)
    s = np.asarray(sigma)
    a2 = np.arange(n)
    delta = (mult * b[0, 1] + a2 - b[s[0], s[1]]) % n
    a = np.zeros((n, m), dtype=np.int64)
    a[:, 1] = a2
    for i in range(2, m):
        a[:, i] = (delta + b[s[0], s[i]] - mult * b[0, i]) % n
    return a


def _candidates_pairwise(b: np.ndarray, sigma, l: int, n: int) -> np.ndarray:
    m = b.shape[0]
    mult = pow(2, l, n)
    s = np.asarray(sigma)
    a2, a3 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    d1 = (mult * b[0, 1] + a2 - b[s[0], s[1]]) % n
    d2 = (mult * b[0, 2] + a3 - b[s[0], s[2]]) % n
    keep = d1 == d2
    d1 = d1[keep]
    a = np.zeros((len(d1), m), dtype=np.int64)
    a[:, 1] = a2[keep]
    for i in range(2, m):
        a[:, i] = (d1 + b[s[0], s[i]] - mult * b[0, i]) % n
    return a


def _search_sigmas(spec: CodeSpec, b: np.ndarray, sigmas, paper_faithful: bool) -> list[Permutation]:
    m, n = spec.m, spec.n
    gen = _candidates_pairwise if paper_faithful else _candidates_optimized
    found = []
    for sigma in sigmas:
        for l in range(m):
            a = gen(b, sigma, l, n)
            if len(a) == 0:
                continue
            ok = _m_invariant(b, sigma, pow(2, l, n), a, n)
            if not ok.any():
                continue
            cands = [Permutation(tuple(sigma), tuple(int(x) for x in row), l, n) for row in a[ok]]
            maps = np.stack([p.index_map() for p in cands])
            verdict = _definitive_batch(spec, maps)
            found.extend(p for p, v in zip(cands, verdict) if v)
    return found


def _worker(args):
    spec, b, sigmas, paper_faithful = args
    return _search_sigmas(spec, b, sigmas, paper_faithful)


def search_automorphisms(mm: MMatrix, spec: CodeSpec, paper_faithful: bool = False,
                         workers: int = 1) -> AutomorphismGroup:
    """Heuristic search over ``(sigma, (0, a_2, ..., a_m), l)``.

    For every ``sigma`` and ``l`` the offsets follow from the first M row:
    the optimized mode sweeps ``a_2`` and derives the rest, the
    paper-faithful mode sweeps ``(a_2, a_3)`` and keeps the pairs whose
    two shift differences agree.  A candidate is kept when every M row is
    carried onto a cyclic shift of an M row and the definitive codeword
    check passes.  The result does not depend on ``workers``.
    """
    if spec.m < 3:
        raise ValueError("need m >= 3")
    b = _b_array(mm)
    sigmas = list(itertools.permutations(range(spec.m)))
    if workers > 1:
        chunks = [sigmas[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = ex.map(_worker, [(spec, b, c, paper_faithful) for c in chunks])
            found = [p for part in parts for p in part]
    else:
        found = _search_sigmas(spec, b, sigmas, paper_faithful)
    return _make_group(spec, found)


def _make_group(spec: CodeSpec, found) -> AutomorphismGroup:
    seen = set()
    classes = []
    for p in sorted((q.normalized() for q in found), key=_sort_key):
        key = p.index_map().tobytes()
        if key not in seen:
            seen.add(key)
            classes.append(p)
    return AutomorphismGroup(spec.m, spec.n, tuple(classes))


def brute_force_group(spec: CodeSpec, exhaustive: bool | None = None) -> AutomorphismGroup:
    """Ground truth within the ``(sigma, a, l)`` family, definitive check only.

    ``exhaustive`` (default for m <= 4) sweeps every ``(a_2, ..., a_m)``;
    otherwise ``a_3..a_m`` are derived from the first M row as in the search,
    without the M-invariance shortcut.
    """
    m, n = spec.m, spec.n
    if exhaustive is None:
        exhaustive = m <= 4
    if exhaustive and m > 4:
        raise ValueError("exhaustive enumeration is limited to m <= 4")
    if not exhaustive and m > 5:
        raise ValueError("brute force is limited to m <= 5")
    if exhaustive:
        tail = np.array(list(itertools.product(range(n), repeat=m - 1)), dtype=np.int64)
        grid = np.hstack([np.zeros((len(tail), 1), dtype=np.int64), tail])
    else:
        b = _b_array(compute_m(spec))
    found = []
    for sigma in itertools.permutations(range(m)):
        for l in range(m):
            a = grid if exhaustive else _candidates_optimized(b, sigma, l, n)
            maps = _maps_for(sigma, a, l, n)
            ok = _definitive_batch(spec, maps)
            found.extend(Permutation(sigma, tuple(int(x) for x in row), l, n) for row in a[ok])
    return _make_group(spec, found)


def _maps_for(sigma, a: np.ndarray, l: int, n: int) -> np.ndarray:
    m = len(sigma)
    j = np.arange(n)
    mult = pow(2, l, n)
    dst = np.empty((len(a), m * n), dtype=np.int64)
    for i in range(m):
        dst[:, j * m + i] = ((j[None, :] * mult + a[:, i:i + 1]) % n) * m + sigma[i]
    return dst


def compute_m(spec: CodeSpec) -> MMatrix:
    return rs_core.compute_m_matrix(spec)


@lru_cache(maxsize=None)
def automorphism_group(spec: CodeSpec, paper_faithful: bool = False) -> AutomorphismGroup:
    return search_automorphisms(rs_core.compute_m_matrix(spec), spec, paper_faithful)


def reversal_pattern(m: int, n: int) -> Permutation:
    """Candidate ``sigma = (1,m)(2,m-1)...`` with
    ``a = (0, 2^(m-1)+1, 3, 2^(m-1)+1+3, 6, ...)``, l = 0."""
    sigma = tuple(m - 1 - i for i in range(m))
    h = (1 << (m - 1)) + 1
    a = tuple(3 * (i // 2) + (h if i % 2 else 0) for i in range(m))
    return Permutation(sigma, a, 0, n)
