"""BPSK/AWGN Monte Carlo comparison of uncoded, HDD, SPA and PSPA decoding.

Frames are generated in fixed-size chunks.  Chunk ``c`` at sweep point
``p`` draws everything (messages, noise, permutation choices) from
generators seeded with ``(master_seed, p, c)``, so results do not depend on
how many workers process the chunks.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .automorphism import automorphism_group
from .decoders import PspaDecoder, SpaDecoder, hdd_decode
from .rs_core import (CodeSpec, binary_generator_matrix, bits_to_codeword, code_spec,
                      codeword_to_bits, decoding_matrix)

log = logging.getLogger(__name__)

DECODERS = ("uncoded", "hdd", "spa", "pspa")
CSV_HEADER = ["ebno_db", "decoder", "frames", "bit_errors", "frame_errors", "ber", "fer", "ci95"]
NOISELESS_LLR = 1e3


@dataclass(frozen=True)
class ChannelConfig:
    ebno_db: float
    rate: float
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")

    @property
    def noise_sigma(self) -> float:
        if math.isinf(self.ebno_db) and self.ebno_db > 0:
            return 0.0
        return math.sqrt(1.0 / (2.0 * self.rate * 10.0 ** (self.ebno_db / 10.0)))


def bpsk_llr(bits, sigma: float, noise) -> np.ndarray:
    """BPSK (0 -> +1, 1 -> -1) through AWGN; returns ``2 r / sigma^2``."""
    s = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    if sigma == 0.0:
        return s * NOISELESS_LLR
    r = s + sigma * noise
    return 2.0 * r / sigma ** 2


def transmit(spec: CodeSpec, codeword_bits, config: ChannelConfig, rng: np.random.Generator | None = None):
    bits = np.asarray(codeword_bits)
    rng = rng if rng is not None else np.random.default_rng(config.master_seed)
    return bpsk_llr(bits, config.noise_sigma, rng.standard_normal(bits.shape))


def q_function(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def uncoded_bpsk_ber(ebno_db: float) -> float:
    return q_function(math.sqrt(2.0 * 10.0 ** (ebno_db / 10.0)))


@dataclass
class BerPoint:
    ebno_db: float
    decoder: str
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    sum_sq: int = 0  # sum over frames of squared bit-error counts
    bits_per_frame: int = 1
    wall_time: float = 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.bits_per_frame) if self.frames else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ci95(self) -> float:
        """Half-width of a 95% interval on the BER.

        Uses the frame-level variance of the bit-error count (errors cluster
        within frames); with no errors at all, the rule-of-three bound.
        """
        if self.frames == 0:
            return float("inf")
        nb = self.frames * self.bits_per_frame
        if self.bit_errors == 0:
            return 3.0 / nb
        f = self.frames
        mean = self.bit_errors / f
        var = max(self.sum_sq / f - mean * mean, 0.0) * f / max(f - 1, 1)
        return 1.96 * math.sqrt(var / f) / self.bits_per_frame

    @property
    def ci(self) -> tuple[float, float]:
        return max(self.ber - self.ci95, 0.0), self.ber + self.ci95

    def add(self, errors: np.ndarray):
        errors = np.asarray(errors, dtype=np.int64)
        self.frames += len(errors)
        self.bit_errors += int(errors.sum())
        self.frame_errors += int((errors > 0).sum())
        self.sum_sq += int((errors * errors).sum())

    def csv_row(self) -> list[str]:
        return [_fmt_ebno(self.ebno_db), self.decoder, str(self.frames), str(self.bit_errors),
                str(self.frame_errors), f"{self.ber:.6e}", f"{self.fer:.6e}", f"{self.ci95:.6e}"]


def _fmt_ebno(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:g}"


@dataclass(frozen=True)
class StopRule:
    min_frame_errors: int = 100
    max_frames: int = 10_000_000

    def done(self, pt: BerPoint) -> bool:
        return pt.frame_errors >= self.min_frame_errors or pt.frames >= self.max_frames


@dataclass
class SweepConfig:
    m: int = 5
    parity: int = 3
    ebno_db: list = field(default_factory=lambda: [5.0, 6.0, 7.0])
    decoders: list = field(default_factory=lambda: list(DECODERS))
    max_iters: int = 30
    max_perms: int = 10
    exclude_identity: bool = True
    combine: str = "posterior"
    count_initial_run: bool = False
    min_frame_errors: int = 100
    max_frames: int = 10_000_000
    chunk_size: int = 1024
    seed: int = 0
    threads: int = 1

    @property
    def stop_rule(self) -> StopRule:
        return StopRule(self.min_frame_errors, self.max_frames)


# --------------------------------------------------------------------------
# per-chunk work


class _Context:
    """Everything a worker needs to simulate chunks for one code."""

    def __init__(self, cfg: SweepConfig):
        self.cfg = cfg
        self.spec = code_spec(cfg.m, cfg.parity)
        self.G = binary_generator_matrix(self.spec).astype(np.float64)
        self.info = self.spec.info_bit_indices
        self.spa = SpaDecoder(decoding_matrix(self.spec))
        self.pspa = None
        if "pspa" in cfg.decoders:
            self.pspa = PspaDecoder(self.spa, automorphism_group(self.spec), cfg.max_iters,
                                    cfg.max_perms, exclude_identity=cfg.exclude_identity,
                                    combine=cfg.combine, count_initial_run=cfg.count_initial_run)

    def run_chunk(self, point: int, ebno: float, chunk: int, nframes: int) -> dict[str, np.ndarray]:
        cfg, spec = self.cfg, self.spec
        rng = np.random.default_rng([cfg.seed, point, chunk])
        perm_rng = np.random.default_rng([cfg.seed, point, chunk, 1])
        msg = rng.integers(0, 2, size=(nframes, self.G.shape[0]))
        cw = (np.rint(msg @ self.G).astype(np.int64) & 1).astype(np.uint8)
        noise = rng.standard_normal(cw.shape)
        ch = ChannelConfig(ebno, spec.k / spec.n, cfg.seed)
        llr = bpsk_llr(cw, ch.noise_sigma, noise)
        ref = cw[:, self.info]
        out = {}

        def count(bits):
            return (bits[:, self.info] != ref).sum(axis=1)

        if "uncoded" in cfg.decoders:
            unc = ChannelConfig(ebno, 1.0, cfg.seed)
            out["uncoded"] = (bpsk_llr(ref, unc.noise_sigma, noise[:, self.info]) < 0) != ref
            out["uncoded"] = out["uncoded"].sum(axis=1)
        if "hdd" in cfg.decoders:
            out["hdd"] = count(self._hdd(llr))
        if "spa" in cfg.decoders or "pspa" in cfg.decoders:
            first = self.spa.decode(llr, cfg.max_iters)
            if "spa" in cfg.decoders:
                out["spa"] = count(first.bits)
            if "pspa" in cfg.decoders:
                failed = np.flatnonzero(~first.valid)
                draws = [np.empty(0, dtype=np.int64)] * nframes
                for b in failed:
                    draws[b] = self.pspa.draws(perm_rng)
                res = self.pspa.decode_batch(llr, draws, first=first)
                out["pspa"] = count(res.bits)
        return out

    def _hdd(self, llr: np.ndarray) -> np.ndarray:
        f = self.spec.field
        hard = (llr < 0).astype(np.uint8)
        out = hard.copy()
        for b in np.flatnonzero(~self.spa.is_valid(hard)):
            res = hdd_decode(self.spec, bits_to_codeword(f, hard[b]))
            if res.success:
                out[b] = codeword_to_bits(f, res.codeword)
        return out


_CTX: _Context | None = None


def _init_worker(cfg: SweepConfig):
    global _CTX
    _CTX = _Context(cfg)


def _run_chunk(args):
    return _CTX.run_chunk(*args)


# --------------------------------------------------------------------------
# sweep


def run_sweep(spec: CodeSpec, decoders, ebno_list, stop_rule: StopRule | None = None,
              master_seed: int = 0, *, threads: int = 1, chunk_size: int = 1024,
              max_iters: int = 30, max_perms: int = 10, progress=None, **pspa_options) -> list[BerPoint]:
    """Paired sweep of ``decoders`` over ``ebno_list`` for the code ``spec``."""
    rule = stop_rule or StopRule()
    cfg = SweepConfig(m=spec.m, parity=spec.n - spec.k, ebno_db=[float(x) for x in ebno_list],
                      decoders=list(decoders), max_iters=max_iters, max_perms=max_perms,
                      min_frame_errors=rule.min_frame_errors, max_frames=rule.max_frames,
                      chunk_size=chunk_size, seed=master_seed, threads=threads, **pspa_options)
    return sweep(cfg, progress)


def sweep(cfg: SweepConfig, progress=None) -> list[BerPoint]:
    """One :class:`BerPoint` per (Eb/N0, decoder), decoders fed identical frames.

    At each point chunks are consumed in index order until every decoder
    satisfies the stop rule; chunks computed beyond that index by idle
    workers are discarded.
    """
    for d in cfg.decoders:
        if d not in DECODERS:
            raise ValueError(f"unknown decoder {d!r}")
    ctx = _Context(cfg)
    nbits = len(ctx.info)
    rule = cfg.stop_rule
    pool = None
    if cfg.threads > 1:
        pool = ProcessPoolExecutor(max_workers=cfg.threads, initializer=_init_worker, initargs=(cfg,))
    points: list[BerPoint] = []
    try:
        for p, ebno in enumerate(cfg.ebno_db):
            ebno = float(ebno)
            t0 = time.perf_counter()
            pts = {d: BerPoint(ebno, d, bits_per_frame=nbits) for d in cfg.decoders}
            chunk = 0
            while not all(rule.done(pt) for pt in pts.values()):
                wave = max(cfg.threads, 1)
                jobs = []
                for c in range(chunk, chunk + wave):
                    remaining = rule.max_frames - c * cfg.chunk_size
                    if remaining <= 0:
                        break
                    jobs.append((p, ebno, c, min(cfg.chunk_size, remaining)))
                if pool is None:
                    results = [ctx.run_chunk(*j) for j in jobs]
                else:
                    results = list(pool.map(_run_chunk, jobs))
                for res in results:
                    chunk += 1
                    for d, errs in res.items():
                        pts[d].add(errs)
                    if all(rule.done(pt) for pt in pts.values()):
                        break
                if progress:
                    progress(ebno, pts)
            dt = time.perf_counter() - t0
            for d in cfg.decoders:
                pts[d].wall_time = dt
                points.append(pts[d])
            log.info("Eb/N0=%s dB: %s", ebno, ", ".join(f"{d} ber={pts[d].ber:.3e}" for d in cfg.decoders))
    finally:
        if pool is not None:
            pool.shutdown()
    return points


def write_csv(points: list[BerPoint], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for pt in points:
        w.writerow(pt.csv_row())


def csv_text(points: list[BerPoint]) -> str:
    buf = io.StringIO()
    write_csv(points, buf)
    return buf.getvalue()


def ber_curve(points: list[BerPoint], decoder: str) -> list[BerPoint]:
    return sorted((p for p in points if p.decoder == decoder), key=lambda p: p.ebno_db)


def ebno_at_ber(points: list[BerPoint], decoder: str, target: float) -> float | None:
    """Eb/N0 where the decoder's curve crosses ``target``; linear in
    (Eb/N0, log10 BER) between the bracketing points."""
    curve = [p for p in ber_curve(points, decoder) if p.bit_errors > 0]
    for lo, hi in zip(curve, curve[1:]):
        if lo.ber >= target >= hi.ber and lo.ber > hi.ber:
            y0, y1 = math.log10(lo.ber), math.log10(hi.ber)
            t = (math.log10(target) - y0) / (y1 - y0)
            return lo.ebno_db + t * (hi.ebno_db - lo.ebno_db)
    return None


def config_dict(cfg: SweepConfig) -> dict:
    return asdict(cfg)
