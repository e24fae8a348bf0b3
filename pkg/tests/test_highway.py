import pytest

from langant.constructions import elementary_cycle_pattern, l2kr_picture
from langant.engine import Ant, Configuration, Pattern
from langant.highway import (DegenerateDriftError, Highway, canonicalise, catalog_add,
                             catalog_dumps, catalog_loads, detect, extract_at,
                             extract_candidate, highway_at_phase, is_minimal,
                             least_rotation, primitive_period, same_highway,
                             verify_highway)


@pytest.fixture(scope="module")
def lr():
    rep = detect("LR", Configuration.white(), 10**5)
    assert rep.found
    return rep


def test_lr_detection(lr):
    assert lr.period == 104
    assert tuple(abs(v) for v in lr.drift) == (2, 2)
    assert lr.preperiod_bound <= lr.steps_simulated
    assert lr.periodic_onset <= lr.preperiod_bound
    assert verify_highway(lr.highway)


def test_llrr_has_no_highway():
    rep = detect("LLRR", Configuration.white(), 10**6)
    assert not rep.found and rep.outcome == "no_highway_within_budget"
    assert rep.steps_simulated == 10**6


def test_detect_rejects_trivial_word():
    with pytest.raises(ValueError):
        detect("LL", Configuration.white(), 1000)


def test_detector_verifier_agreement(lr):
    ant = Ant("LR")
    ant.advance(lr.preperiod_bound)
    pat, pos, d, drift = extract_candidate("LR", ant.configuration(), lr.period)
    h = Highway("LR", pat, pos, d, lr.period, drift)
    assert verify_highway(h)
    assert drift == lr.drift


def test_half_period_rejected(lr):
    h = lr.highway
    half = Highway(h.rule, h.pattern, h.position, h.direction, 52, h.drift)
    v = verify_highway(half)
    assert not v and v.clause in ("support", "pose", "recurrence")


def test_reject_reports_clause_and_cell(lr):
    h = lr.highway
    vals = dict(h.pattern.values)
    vals[h.position] ^= 1
    v = verify_highway(Highway(h.rule, Pattern(vals), h.position, h.direction, h.period, h.drift))
    assert not v
    assert "reject" in str(v)
    bad = Highway(h.rule, h.pattern, (999, 999), h.direction, h.period, h.drift)
    assert verify_highway(bad).clause == "position"
    zero = Highway(h.rule, h.pattern, h.position, h.direction, h.period, (0, 0))
    assert verify_highway(zero).clause == "drift"


def test_trace_clause(lr):
    h = lr.highway
    tc = list(h.trace_cycle)
    tc[0] ^= 1
    g = Highway(h.rule, h.pattern, h.position, h.direction, h.period, h.drift, tc)
    assert verify_highway(g).clause == "trace"
    assert verify_highway(g, check_trace=False)


def test_degenerate_drift():
    before, _ = elementary_cycle_pattern(1, 0, 0, 0, 0)
    with pytest.raises(DegenerateDriftError):
        extract_candidate("LLR", Configuration(before.to_picture(), (0, 0), 1), 8)


def test_fundamental_l6r_from_picture():
    # at time 0 the cells behind the ant do not yet carry the print, so the
    # recurrence clause fails; one period later the pattern is a highway
    c = l2kr_picture(3, 3, 0)
    pat, pos, d, drift = extract_candidate("L6R", c, 50)
    assert not verify_highway(Highway("L6R", pat, pos, d, 50, drift))
    ant = Ant("L6R", c)
    ant.advance(50)
    h = extract_at(ant, 50)
    assert h.drift == (-1, 1)
    assert verify_highway(h)


def test_rotation_invariance(lr):
    for r in range(4):
        assert verify_highway(lr.highway.rotated(r))


def test_canonical_form_closure(lr):
    h = lr.highway
    c = canonicalise(h)
    assert canonicalise(h.rotated(1)).key() == c.key()
    assert canonicalise(highway_at_phase(h, 104)).key() == c.key()
    assert canonicalise(highway_at_phase(h, 37)).key() == c.key()
    assert verify_highway(c)
    assert same_highway(h, h.rotated(3))


def test_minimality(lr):
    assert is_minimal(lr.highway)
    assert primitive_period(lr.highway.trace_cycle) == 104


def test_least_rotation():
    seq = (2, 1, 0, 1, 0, 0)
    s = least_rotation(seq)
    rots = [seq[i:] + seq[:i] for i in range(len(seq))]
    assert seq[s:] + seq[:s] == min(rots)
    assert primitive_period((1, 2, 1, 2)) == 2
    assert primitive_period((1, 2, 1)) == 3


def test_catalog_round_trip(lr):
    text = catalog_dumps([canonicalise(lr.highway)])
    hs = catalog_loads(text)
    assert catalog_dumps(hs) == text
    assert all(verify_highway(h) for h in hs)


def test_catalog_add_dedupes(lr):
    cat = {}
    assert catalog_add(cat, lr.highway)
    assert not catalog_add(cat, lr.highway.rotated(2))
    assert len(cat) == 1


def test_extract_at_restores_ant(lr):
    ant = Ant("LR")
    ant.advance(lr.preperiod_bound)
    before = ant.configuration()
    extract_at(ant, 104)
    assert ant.configuration() == before
