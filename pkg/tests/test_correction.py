import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from dsppack import presets
from dsppack.correction import (Scheme, build_approx_correction, check_scheme, correct_full, correct_mr,
                                low_bits_product, parse_scheme, run_scheme)
from dsppack.errors import SchemeMismatch
from dsppack.packing import derive_layout, extract_naive, multiply_packed
from dsppack.words import Word


def test_full_correction_example(int4):
    lanes = extract_naive(-4097, int4)
    assert correct_full(Word(-4097, 48), int4, lanes).values == [-1, -2, 0, 0]
    assert correct_full(0, int4, extract_naive(0, int4)).values == [0, 0, 0, 0]


def test_full_correction_rejects_overlap(fig8):
    with pytest.raises(SchemeMismatch):
        correct_full(0, fig8, extract_naive(0, fig8))


def test_full_correction_unsigned_lanes_untouched():
    cfg = derive_layout([4, 4], [4, 4], 2, w_signed=False)
    p = multiply_packed(cfg, [15, 15], [15, 15])
    lanes = extract_naive(p, cfg)
    assert lanes.values == [225] * 4
    assert correct_full(p, cfg, lanes) == lanes


@pytest.mark.parametrize("w, expected", [([-7, -4], 2 ** 11 + 2 ** 22 + 2 ** 33), ([3, 5], 0),
                                         ([-1, 0], 2 ** 11 + 2 ** 22)])
def test_approx_constant(int4, w, expected):
    assert build_approx_correction(int4, w).value == expected


def test_approx_worked_case(int4):
    c = build_approx_correction(int4, [-1, 0])
    p = multiply_packed(int4, [1, 2], [-1, 0], c)
    assert p.value == 4192255
    assert extract_naive(p, int4).values == [-1, -2, 0, 0]


def test_approx_needs_signed_w():
    cfg = derive_layout([4, 4], [4, 4], 3, w_signed=False)
    with pytest.raises(SchemeMismatch):
        build_approx_correction(cfg, [1, 1])


@pytest.mark.parametrize("a, w, k, expected", [(3, -7, 2, 3), (0, -5, 3, 0), (13, -5, 4, 15)])
def test_low_bits_product(a, w, k, expected):
    assert low_bits_product(a, w, k).value == expected


@given(st.integers(-2 ** 20, 2 ** 20), st.integers(-2 ** 20, 2 ** 20), st.integers(1, 16))
def test_low_bits_product_is_modular(a, w, k):
    assert low_bits_product(a, w, k).value == (a * w) % 2 ** k


def test_low_bits_product_k():
    with pytest.raises(ValueError):
        low_bits_product(1, 1, 0)


def test_mr_worked_example(fig8):
    p = multiply_packed(fig8, [10, 3], [-7, -4])
    lanes = correct_mr(extract_naive(p, fig8), fig8, [10, 3], [-7, -4])
    assert lanes[0].value == -70
    zero = correct_mr(extract_naive(0, fig8), fig8, [0, 0], [0, 0])
    assert zero.values == [0, 0, 0, 0]


def test_mr_needs_overlap(int4):
    with pytest.raises(SchemeMismatch):
        correct_mr(extract_naive(0, int4), int4, [0, 0], [0, 0])


def test_scheme_parsing(int4, fig8):
    assert parse_scheme("MR") is Scheme.MR
    assert str(Scheme.APPROX) == "approx"
    with pytest.raises(SchemeMismatch):
        parse_scheme("round")
    with pytest.raises(SchemeMismatch):
        check_scheme(fig8, "full")
    with pytest.raises(SchemeMismatch):
        check_scheme(fig8, "approx")
    assert check_scheme(int4, "none") is Scheme.NONE


ops = st.tuples(st.lists(st.integers(0, 15), min_size=2, max_size=2),
                st.lists(st.integers(-8, 7), min_size=2, max_size=2))


@given(ops, st.sampled_from([("int4", "none"), ("int4", "full"), ("int4", "approx"),
                             ("fig8-overpack-delta-1", "mr"), ("fig8-overpack-delta-2", "mr"),
                             ("fig8-overpack-delta-3", "mr"), ("fig8-overpack-delta-3", "none")]))
def test_run_scheme_matches_oracle(case, which):
    a, w = case
    name, scheme = which
    cfg = presets.preset(name)
    layout = oracles.layout(cfg.a_offsets, cfg.w_offsets, cfg.a_widths, cfg.w_widths)
    ev = run_scheme(cfg, a, w, scheme)
    assert ev.corrected.values == oracles.lane_values(a, w, layout, scheme, cfg.delta)
    assert ev.expected == [a[i] * w[j] for _, _, i, j in layout]


@given(ops, st.sampled_from(["full", "approx"]))
def test_lane0_untouched(case, scheme):
    a, w = case
    cfg = presets.preset("int4")
    ev = run_scheme(cfg, a, w, scheme)
    assert ev.corrected[0].value == ev.naive[0].value == a[0] * w[0]
    assert all(abs(e) <= 1 for e in ev.errors)
