"""Stability condition, tail limit and the dividing exponent."""

import math

import numpy as np
import pytest

from fracstable import (DomainError, Params, classical_joseph_lundgren,
                        cond_gamma_form, cond_margin, hardy_constant,
                        joseph_lundgren, region_table, sobolev_exponent,
                        stability_verdict, tail_margin)


def _sample_triples(count, seed=20240817):
    """Deterministic admissible (n, s, p) sample."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, 26))
        s = float(rng.uniform(0.05, 0.95))
        if n <= 2 * s:
            continue
        p_s = sobolev_exponent(n, s)
        p = p_s * (1 + float(rng.uniform(0.01, 5.0)))
        out.append((n, s, p))
    return out


def test_margin_closed_point():
    v = stability_verdict(Params(3, 0.5, 3.0))
    assert v.margin == pytest.approx(1.5 - 2 / math.pi, rel=1e-12)
    assert v.cond_holds and not v.singular_solution_stable


def test_gamma_form_equivalence():
    for n, s, p in _sample_triples(200):
        params = Params(n, s, p)
        lhs, rhs = cond_gamma_form(params)
        margin = cond_margin(params)
        scaled = 2 ** (2 * s) * (lhs - rhs)
        assert abs(margin - scaled) <= 1e-10 * (1 + abs(margin))


def test_near_critical_instability():
    for n in (1, 3, 7, 11):
        for s in (0.25, 0.5, 0.75):
            if n <= 2 * s:
                continue
            p_s = sobolev_exponent(n, s)
            for eps in (1e-3, 1e-2):
                assert cond_margin(Params(n, s, p_s + eps)) > 0


def test_tail_margin_closed_point():
    # L_inf(3, 1/2) = pi/2
    tm = tail_margin(3, 0.5)
    assert tm == pytest.approx(math.pi / 2 - 2 / math.pi, rel=1e-12)
    # cross-check against the margin at a huge p
    big = cond_margin(Params(3, 0.5, 1e6))
    assert abs(big - tm) <= 1e-4 * abs(tm)


def test_tail_margin_signs_near_s_one():
    assert tail_margin(11, 0.999) < 0
    assert tail_margin(9, 0.999) > 0


def test_joseph_lundgren_infinite_and_classical():
    assert math.isinf(joseph_lundgren(3, 0.5))
    for n in (11, 12, 15, 20):
        pc = joseph_lundgren(n, 0.999)
        ref = classical_joseph_lundgren(n)
        assert abs(pc - ref) <= 0.01 * ref
    assert math.isinf(classical_joseph_lundgren(10))


def test_dividing_line_property():
    n, s = 11, 0.5
    pc = joseph_lundgren(n, s)
    p_s = sobolev_exponent(n, s)
    assert pc > p_s
    # margin positive strictly between p_S and p_c
    for p in np.linspace(p_s * 1.001, pc * 0.999, 100):
        assert cond_margin(Params(n, s, p)) > 0
    # single sign change on a wide log grid in p
    signs = [cond_margin(Params(n, s, p)) > 0
             for p in np.geomspace(p_s * 1.001, 1e5, 1000)]
    flips = sum(a != b for a, b in zip(signs, signs[1:]))
    assert flips == 1


def test_region_table():
    rows = region_table([3, 11], [0.5])
    assert [(r.n, r.s) for r in rows] == [(3, 0.5), (11, 0.5)]
    assert rows[0].p_S == 2.0 and math.isinf(rows[0].p_c)
    assert rows[1].p_c == pytest.approx(joseph_lundgren(11, 0.5), rel=1e-9)
    # inadmissible rows carry an error flag instead of aborting
    flagged = region_table([1], [0.75])
    assert flagged[0].error != "" and math.isnan(flagged[0].p_c)
    assert region_table([], []) == []


def test_domain_guards():
    with pytest.raises(DomainError):
        cond_margin(Params(3, 0.5, 1.5))   # subcritical
    with pytest.raises(DomainError):
        tail_margin(1, 0.5)
