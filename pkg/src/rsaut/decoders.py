"""Hard-decision Berlekamp-Massey, binary sum-product and permutation SPA decoders.

LLR convention: positive values favour bit 0.  An LLR of exactly 0 is
decided as 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automorphism import AutomorphismGroup, Permutation
from .rs_core import CodeSpec, decoding_matrix, syndromes

LLR_CLIP = 30.0
TANH_GUARD = 1.0 - 1e-15
_TINY = 1e-300


# --------------------------------------------------------------------------
# Berlekamp-Massey


@dataclass
class HddResult:
    codeword: list[int]
    success: bool
    error_positions: list[int] = field(default_factory=list)


def berlekamp_massey(fld, synd: list[int]) -> list[int]:
    """Shortest connection polynomial (low degree first) generating ``synd``."""
    C = [1]
    B = [1]
    L = 0
    shift = 1
    b = 1
    for r, s in enumerate(synd):
        d = s
        for i in range(1, L + 1):
            if i < len(C):
                d ^= fld.mul(C[i], synd[r - i])
        if d == 0:
            shift += 1
            continue
        coef = fld.div(d, b)
        T = list(C)
        need = len(B) + shift
        if len(C) < need:
            C = C + [0] * (need - len(C))
        for i, bi in enumerate(B):
            C[i + shift] ^= fld.mul(coef, bi)
        if 2 * L <= r:
            L = r + 1 - L
            B = T
            b = d
            shift = 1
        else:
            shift += 1
    while len(C) > 1 and C[-1] == 0:
        C.pop()
    return C[:L + 1] if len(C) > L + 1 else C


def _poly_eval(fld, poly, x) -> int:
    acc = 0
    for c in reversed(poly):
        acc = fld.mul(acc, x) ^ c
    return acc


def hdd_decode(spec: CodeSpec, received) -> HddResult:
    """Berlekamp-Massey / Chien / Forney decoding of one received word.

    Corrects up to ``(d_min - 1) // 2`` symbol errors; anything else is
    reported as a failure with the input returned unchanged.
    """
    f = spec.field
    word = [int(v) for v in received]
    if len(word) != spec.n:
        raise ValueError(f"received word must have {spec.n} symbols")
    synd = syndromes(spec, word)
    if not any(synd):
        return HddResult(word, True)
    t = (spec.d_min - 1) // 2
    lam = berlekamp_massey(f, synd)
    L = len(lam) - 1
    if L == 0 or L > t:
        return HddResult(word, False)
    # Chien search: error at j iff lam(alpha^-j) = 0
    positions = [j for j in range(spec.n) if _poly_eval(f, lam, f.alpha_pow(-j)) == 0]
    if len(positions) != L:
        return HddResult(word, False)
    # Forney with first consecutive zero alpha^0: e = X * omega(X^-1) / lam'(X^-1)
    nsyn = len(synd)
    omega = [0] * nsyn
    for i, s in enumerate(synd):
        for k, c in enumerate(lam):
            if i + k < nsyn:
                omega[i + k] ^= f.mul(s, c)
    dlam = [lam[k] if k % 2 == 1 else 0 for k in range(1, len(lam))]
    out = list(word)
    for j in positions:
        X = f.alpha_pow(j)
        Xinv = f.inv(X)
        den = _poly_eval(f, dlam, Xinv)
        if den == 0:
            return HddResult(word, False)
        out[j] ^= f.mul(X, f.div(_poly_eval(f, omega, Xinv), den))
    if any(syndromes(spec, out)):
        return HddResult(word, False)
    return HddResult(out, True, positions)


# --------------------------------------------------------------------------
# sum-product


@dataclass
class DecodeResult:
    bits: np.ndarray
    valid: np.ndarray | bool
    iterations_used: np.ndarray | int
    posterior: np.ndarray
    permutations_used: np.ndarray | int = 0


class SpaDecoder:
    """Flooding sum-product decoder over a fixed binary parity-check matrix.

    Messages live on the edges of the Tanner graph; per-check and
    per-variable sums use ``np.add.reduceat`` so a frame's arithmetic does
    not depend on what else is in the batch.
    """

    def __init__(self, h):
        h = np.asarray(h).astype(bool)
        if h.ndim != 2:
            raise ValueError("parity-check matrix must be 2-D")
        self.h = h
        self.n_checks, self.n_vars = h.shape
        chk, var = np.nonzero(h)  # row-major: sorted by check
        self.edge_check = chk
        self.edge_var = var
        self._check_starts = np.searchsorted(chk, np.arange(self.n_checks))
        by_var = np.lexsort((chk, var))
        self._by_var = by_var
        self._var_starts = np.searchsorted(var[by_var], np.arange(self.n_vars))
        if (np.diff(np.r_[self._check_starts, len(chk)]) == 0).any():
            raise ValueError("empty parity check row")
        self._isolated = np.setdiff1d(np.arange(self.n_vars), var)

    def syndrome(self, bits) -> np.ndarray:
        bits = np.atleast_2d(np.asarray(bits)).astype(np.int64)
        return np.add.reduceat(bits[:, self.edge_var], self._check_starts, axis=1) & 1

    def is_valid(self, bits) -> np.ndarray:
        return ~self.syndrome(bits).any(axis=1)

    def _var_sum(self, r: np.ndarray) -> np.ndarray:
        sums = np.add.reduceat(r[:, self._by_var], self._var_starts, axis=1)
        if len(self._isolated):
            sums[:, self._isolated] = 0.0
        return sums

    def _check_update(self, q: np.ndarray) -> np.ndarray:
        t = np.tanh(0.5 * np.clip(q, -LLR_CLIP, LLR_CLIP))
        logmag = np.log(np.maximum(np.abs(t), _TINY))
        neg = (t < 0).astype(np.int64)
        tot = np.add.reduceat(logmag, self._check_starts, axis=1)[:, self.edge_check]
        par = np.add.reduceat(neg, self._check_starts, axis=1)[:, self.edge_check]
        mag = np.exp(tot - logmag)
        sign = 1.0 - 2.0 * ((par - neg) & 1)
        prod = np.clip(sign * mag, -TANH_GUARD, TANH_GUARD)
        return np.clip(2.0 * np.arctanh(prod), -LLR_CLIP, LLR_CLIP)

    def decode(self, llr, max_iters: int = 30) -> DecodeResult:
        """Decode a frame (1-D) or a batch of frames (2-D, one per row)."""
        llr = np.asarray(llr, dtype=np.float64)
        single = llr.ndim == 1
        llr = np.atleast_2d(llr)
        if llr.shape[1] != self.n_vars:
            raise ValueError(f"LLR length {llr.shape[1]} != {self.n_vars} columns")
        nb = llr.shape[0]
        post = llr.copy()
        bits = (llr < 0).astype(np.uint8)
        valid = self.is_valid(bits)
        iters = np.zeros(nb, dtype=np.int64)
        act = np.flatnonzero(~valid)
        if len(act) and max_iters > 0:
            L = llr[act]
            q = L[:, self.edge_var]
            for it in range(1, max_iters + 1):
                r = self._check_update(q)
                p = L + self._var_sum(r)
                hard = (p < 0).astype(np.uint8)
                ok = self.is_valid(hard)
                post[act] = p
                bits[act] = hard
                iters[act] = it
                valid[act] = ok
                if ok.all():
                    break
                keep = ~ok
                act, L, p, r = act[keep], L[keep], p[keep], r[keep]
                q = p[:, self.edge_var] - r
        if single:
            return DecodeResult(bits[0], bool(valid[0]), int(iters[0]), post[0])
        return DecodeResult(bits, valid, iters, post)


def spa_decode(h, channel_llr, max_iters: int = 30) -> DecodeResult:
    return SpaDecoder(h).decode(channel_llr, max_iters)


# --------------------------------------------------------------------------
# permutation sum-product


def permutation_pool(group: AutomorphismGroup | list[Permutation],
                     exclude_identity: bool = True) -> np.ndarray:
    """Index maps (``(P, m*n)``) of the permutations PSPA may draw."""
    elems = group.elements() if isinstance(group, AutomorphismGroup) else list(group)
    maps = [p.index_map() for p in elems if not (exclude_identity and p.is_identity())]
    if not maps:
        raise ValueError("no permutations to draw from")
    return np.stack(maps)


def draw_permutations(rng: np.random.Generator, pool_size: int, count: int) -> np.ndarray:
    """Uniform draw without replacement."""
    return rng.choice(pool_size, size=min(count, pool_size), replace=False)


class PspaDecoder:
    """SPA on the channel LLRs, then on randomly permuted copies, summing the
    inverse-permuted soft outputs of the failed runs."""

    def __init__(self, h, group, max_iters: int = 30, max_perms: int = 10,
                 exclude_identity: bool = True, combine: str = "posterior",
                 count_initial_run: bool = False):
        if combine not in ("posterior", "extrinsic"):
            raise ValueError("combine must be 'posterior' or 'extrinsic'")
        self.spa = h if isinstance(h, SpaDecoder) else SpaDecoder(h)
        self.pool = permutation_pool(group, exclude_identity)
        self.max_iters = max_iters
        self.trials = max_perms - 1 if count_initial_run else max_perms
        self.combine = combine

    def draws(self, rng: np.random.Generator) -> np.ndarray:
        return draw_permutations(rng, len(self.pool), max(self.trials, 0))

    def decode_batch(self, llr, draws: list[np.ndarray], first: DecodeResult | None = None) -> DecodeResult:
        """``draws[b]`` lists pool indices for frame ``b``; ``first`` may carry
        an already computed plain SPA pass on ``llr``."""
        llr = np.atleast_2d(np.asarray(llr, dtype=np.float64))
        nb = llr.shape[0]
        if first is None:
            first = self.spa.decode(llr, self.max_iters)
        bits = np.array(first.bits, copy=True).reshape(nb, -1)
        post = np.array(first.posterior, copy=True).reshape(nb, -1)
        valid = np.array(first.valid, copy=True).reshape(nb)
        iters = np.array(first.iterations_used, copy=True).reshape(nb)
        used = np.zeros(nb, dtype=np.int64)
        pending = np.flatnonzero(~valid)
        acc = self._soft(post[pending], llr[pending])
        rows_of = {int(b): k for k, b in enumerate(pending)}
        live = pending.copy()
        for t in range(max(self.trials, 0)):
            live = np.array([b for b in live if t < len(draws[b])], dtype=np.int64)
            if len(live) == 0:
                break
            dst = self.pool[np.array([draws[b][t] for b in live], dtype=np.int64)]
            y = np.empty_like(llr[live])
            np.put_along_axis(y, dst, llr[live], axis=1)
            res = self.spa.decode(y, self.max_iters)
            used[live] += 1
            iters[live] += res.iterations_used
            back_bits = np.take_along_axis(res.bits, dst, axis=1)
            back_post = np.take_along_axis(res.posterior, dst, axis=1)
            ok = np.asarray(res.valid)
            for k, b in enumerate(live):
                if ok[k]:
                    bits[b] = back_bits[k]
                    post[b] = back_post[k]
                    valid[b] = True
                else:
                    acc[rows_of[int(b)]] += self._soft(back_post[k], llr[b])
            live = live[~ok]
        # frames that never produced a valid codeword: hard-decide the sum
        for k, b in enumerate(pending):
            if not valid[b]:
                total = acc[k] if self.combine == "posterior" else acc[k] + llr[b]
                post[b] = total
                bits[b] = (total < 0).astype(np.uint8)
        failed = pending[~valid[pending]]
        if len(failed):
            valid[failed] = self.spa.is_valid(bits[failed])
        return DecodeResult(bits, valid, iters, post, used)

    def _soft(self, post, llr):
        return post if self.combine == "posterior" else post - llr

    def decode(self, channel_llr, rng_seed=None) -> DecodeResult:
        llr = np.asarray(channel_llr, dtype=np.float64)
        if llr.ndim != 1:
            raise ValueError("decode() takes a single frame; use decode_batch for batches")
        rng = np.random.default_rng(rng_seed)
        res = self.decode_batch(llr[None, :], [self.draws(rng)])
        return DecodeResult(res.bits[0], bool(res.valid[0]), int(res.iterations_used[0]),
                            res.posterior[0], int(res.permutations_used[0]))


def pspa_decode(spec: CodeSpec, group, channel_llr, max_iters: int = 30, max_perms: int = 10,
                rng_seed=None, **options) -> DecodeResult:
    """Permutation sum-product decoding over the polynomial parity matrix of ``spec``."""
    dec = PspaDecoder(decoding_matrix(spec), group, max_iters, max_perms, **options)
    return dec.decode(channel_llr, rng_seed)
