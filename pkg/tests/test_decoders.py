from __future__ import annotations

import numpy as np
import pytest
from hypothesis import example, given, strategies as st

from rsaut.automorphism import Permutation, apply_permutation, automorphism_group
from rsaut.decoders import (LLR_CLIP, PspaDecoder, SpaDecoder, draw_permutations,
                            hdd_decode, permutation_pool, pspa_decode, spa_decode)
from rsaut.rs_core import (code_spec, codeword_to_bits, decoding_matrix, is_codeword,
                           random_codeword)
from rsaut.sim import ChannelConfig, transmit


def _noisy_frames(spec, ebno, count, seed):
    rng = np.random.default_rng(seed)
    cws = np.array([codeword_to_bits(spec.field, random_codeword(spec, rng)) for _ in range(count)])
    llr = transmit(spec, cws, ChannelConfig(ebno, spec.k / spec.n), rng)
    return cws, llr


# ---------------------------------------------------------------- HDD


def test_hdd_clean_codeword():
    spec = code_spec(5)
    cw = random_codeword(spec, np.random.default_rng(0))
    res = hdd_decode(spec, cw)
    assert res.success and res.codeword == cw and not res.error_positions


def test_hdd_all_single_symbol_errors_n15():
    spec = code_spec(4)
    rng = np.random.default_rng(11)
    failures = 0
    for _ in range(100):
        cw = random_codeword(spec, rng)
        for pos in range(spec.n):
            for e in range(1, spec.field.order):
                word = list(cw)
                word[pos] ^= e
                res = hdd_decode(spec, word)
                failures += not (res.success and res.codeword == cw)
    assert failures == 0


@given(st.integers(0, 2 ** 32 - 1), st.data())
def test_hdd_single_error_property(seed, data):
    spec = code_spec(6)
    cw = random_codeword(spec, np.random.default_rng(seed))
    pos = data.draw(st.integers(0, spec.n - 1))
    e = data.draw(st.integers(1, spec.field.order - 1))
    word = list(cw)
    word[pos] ^= e
    res = hdd_decode(spec, word)
    assert res.success and res.codeword == cw and list(res.error_positions) == [pos]


def test_hdd_double_errors_never_silently_pass_as_input():
    spec = code_spec(4)
    rng = np.random.default_rng(2)
    for _ in range(300):
        cw = random_codeword(spec, rng)
        word = list(cw)
        i, j = rng.choice(spec.n, 2, replace=False)
        word[i] ^= int(rng.integers(1, 16))
        word[j] ^= int(rng.integers(1, 16))
        res = hdd_decode(spec, word)
        # distance 4: two errors are never corrected back to cw, and a
        # reported success must be a genuine codeword
        assert res.codeword != cw
        if res.success:
            assert is_codeword(spec, res.codeword)


# ---------------------------------------------------------------- SPA


def test_check_update_two_variables():
    # with two neighbours the extrinsic message is the other input itself
    dec = SpaDecoder(np.array([[1, 1]]))
    r = dec._check_update(np.array([[2.0, -3.0]]))[0]
    assert r[0] == pytest.approx(-3.0) and r[1] == pytest.approx(2.0)


def test_check_update_tanh_bound():
    # inputs +2 and -3 seen by a third neighbour: sign of the product, magnitude <= 2
    dec = SpaDecoder(np.array([[1, 1, 1]]))
    r = dec._check_update(np.array([[2.0, -3.0, 0.7]]))[0]
    out = dec._check_update(np.array([[2.0, -3.0, 50.0]]))[0][2]
    assert out < 0 and abs(out) <= 2.0
    assert r[2] < 0 and abs(r[2]) <= 2.0


@given(st.lists(st.floats(-60, 60), min_size=2, max_size=6))
@example([0.0, 19.0])
def test_check_update_bounded_and_finite(q):
    dec = SpaDecoder(np.ones((1, len(q)), dtype=np.uint8))
    r = dec._check_update(np.array([q]))[0]
    assert np.isfinite(r).all() and (np.abs(r) <= LLR_CLIP).all()
    # the bound is exact in the tanh domain; atanh near +-1 loses a few ulps
    t = np.abs(np.tanh(0.5 * np.clip(q, -LLR_CLIP, LLR_CLIP)))
    for k in range(len(q)):
        assert abs(np.tanh(0.5 * r[k])) <= np.delete(t, k).min() + 1e-12


def test_spa_noiseless():
    spec = code_spec(5)
    bits = codeword_to_bits(spec.field, random_codeword(spec, np.random.default_rng(4)))
    res = spa_decode(decoding_matrix(spec), 20.0 * (1 - 2.0 * bits))
    assert res.valid and res.iterations_used <= 1
    assert np.array_equal(res.bits, bits)


def test_spa_batch_matches_single_frames():
    spec = code_spec(4)
    dec = SpaDecoder(decoding_matrix(spec))
    _, llr = _noisy_frames(spec, 3.0, 40, 9)
    batch = dec.decode(llr, 15)
    for b in range(len(llr)):
        one = dec.decode(llr[b], 15)
        assert np.array_equal(one.bits, batch.bits[b])
        assert np.array_equal(one.posterior, batch.posterior[b])
        assert one.valid == batch.valid[b]
        assert one.iterations_used == batch.iterations_used[b]
    assert np.array_equal(dec.is_valid(batch.bits), batch.valid)


def test_spa_beats_uncoded_at_high_snr():
    spec = code_spec(5)
    cws, llr = _noisy_frames(spec, 6.0, 1000, 21)  # 155k bits
    res = SpaDecoder(decoding_matrix(spec)).decode(llr)
    coded = (res.bits != cws).mean()
    raw = ((llr < 0) != cws).mean()
    assert coded < raw


# ---------------------------------------------------------------- PSPA


def test_permutation_draws():
    rng = np.random.default_rng(0)
    d = draw_permutations(rng, 30, 10)
    assert len(set(d.tolist())) == 10 and d.max() < 30
    assert len(draw_permutations(rng, 5, 10)) == 5
    spec = code_spec(5)
    pool = permutation_pool(automorphism_group(spec))
    assert len(pool) == 123   # identity excluded
    assert not any(np.array_equal(row, np.arange(spec.nbits)) for row in pool)


def test_pspa_converged_input_equals_spa():
    spec = code_spec(5)
    bits = codeword_to_bits(spec.field, random_codeword(spec, np.random.default_rng(1)))
    llr = 8.0 * (1 - 2.0 * bits)
    plain = spa_decode(decoding_matrix(spec), llr)
    res = pspa_decode(spec, automorphism_group(spec), llr, rng_seed=3)
    assert res.permutations_used == 0
    assert np.array_equal(res.bits, plain.bits) and np.array_equal(res.posterior, plain.posterior)


def test_pspa_identity_only_doubles_posterior():
    spec = code_spec(4)
    h = decoding_matrix(spec)
    _, llr = _noisy_frames(spec, 1.0, 200, 5)
    dec = SpaDecoder(h)
    first = dec.decode(llr, 5)
    failed = np.flatnonzero(~first.valid)
    assert len(failed) > 0
    pspa = PspaDecoder(dec, [Permutation.identity(4, 15)], max_iters=5, max_perms=1,
                       exclude_identity=False)
    for b in failed[:10]:
        out = pspa.decode(llr[b], rng_seed=0)
        assert out.permutations_used == 1
        assert np.allclose(out.posterior, 2 * first.posterior[b])
        assert np.array_equal(out.bits, first.bits[b])


def test_pspa_deterministic_and_inverse_mapped():
    spec = code_spec(5)
    g = automorphism_group(spec)
    cws, llr = _noisy_frames(spec, 4.0, 300, 8)
    dec = PspaDecoder(decoding_matrix(spec), g)
    first = dec.spa.decode(llr)
    idx = np.flatnonzero(~first.valid)[:20]
    recovered = 0
    for b in idx:
        r1, r2 = dec.decode(llr[b], rng_seed=99), dec.decode(llr[b], rng_seed=99)
        assert np.array_equal(r1.bits, r2.bits) and np.array_equal(r1.posterior, r2.posterior)
        assert 1 <= r1.permutations_used <= 10
        if r1.valid:
            # result is reported in the original coordinates
            assert dec.spa.is_valid(r1.bits)[0]
            recovered += np.array_equal(r1.bits, cws[b])
    assert recovered > 0


def test_pspa_batch_matches_single():
    spec = code_spec(4)
    g = automorphism_group(spec)
    _, llr = _noisy_frames(spec, 2.0, 60, 13)
    dec = PspaDecoder(decoding_matrix(spec), g, max_iters=10)
    draws = [dec.draws(np.random.default_rng(k)) for k in range(len(llr))]
    batch = dec.decode_batch(llr, draws)
    for b in range(len(llr)):
        one = dec.decode(llr[b], rng_seed=b)
        assert np.array_equal(one.bits, batch.bits[b])
        assert one.permutations_used == batch.permutations_used[b]


def test_permuted_llrs_decode_to_permuted_codeword():
    spec = code_spec(5)
    g = automorphism_group(spec)
    p = g.base_classes[1].shifted(4)
    bits = codeword_to_bits(spec.field, random_codeword(spec, np.random.default_rng(2)))
    llr = 5.0 * (1 - 2.0 * bits)
    res = spa_decode(decoding_matrix(spec), apply_permutation(p, llr))
    assert res.valid and np.array_equal(res.bits, apply_permutation(p, bits))


@pytest.mark.slow
def test_pspa_recovers_spa_failures():
    spec = code_spec(5)
    g = automorphism_group(spec)
    dec = PspaDecoder(decoding_matrix(spec), g)
    failures = recovered = 0
    seed = 0
    while failures < 10_000:
        cws, llr = _noisy_frames(spec, 5.0, 4096, 1000 + seed)
        seed += 1
        first = dec.spa.decode(llr)
        bad = np.flatnonzero(~first.valid)
        rng = np.random.default_rng(seed)
        res = dec.decode_batch(llr[bad], [dec.draws(rng) for _ in bad])
        failures += len(bad)
        recovered += int((res.bits == cws[bad]).all(axis=1).sum())
    assert recovered / failures > 0.0
