import numpy as np
import pytest

from langant import constructions as C
from langant.engine import Ant, Picture, apply_pattern_steps
from langant.highway import canonicalise, primitive_period, verify_highway


class TestElementaryCycles:
    def test_k1_trace(self):
        assert C.cycle_trace(1, 0, 0, 0, 0) == [0, 0, 0, 0, 1, 1, 1, 1]

    def test_full_a_is_trivial(self):
        before, after = C.elementary_cycle_pattern(2, 4, 1, 3, 0)
        assert before == after
        assert C.cycle_trace(2, 4, 1, 3, 0) == []
        assert C.cycle_mismatch(2, 4, 1, 3, 0) is None

    def test_k3_example(self):
        before, after = C.elementary_cycle_pattern(3, 4, 2, 1, 0)
        got, pos, d = apply_pattern_steps("L6R", before, (0, 0), 1, 8)
        assert got == after and pos == (0, 0) and d == 1
        assert [after[c] for c in C.CYCLE_CELLS] == [6, 4, 3, 2]

    def test_k2_trace_matches_simulation(self):
        trace = []
        before, _ = C.elementary_cycle_pattern(2, 1, 0, 0, 0)
        apply_pattern_steps("LLLLR", before, (0, 0), 1, 12, trace)
        assert trace == C.cycle_trace(2, 1, 0, 0, 0)
        assert len(trace) == 12

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_enumeration(self, k):
        cases = list(C.cycle_cases(k))
        assert len(cases) == sum((a + 1) ** 3 for a in range(2 * k + 1))
        assert all(C.cycle_mismatch(k, *abcd) is None for abcd in cases)

    @pytest.mark.parametrize("args", [(0, 0, 0, 0, 0), (1, 3, 0, 0, 0), (2, 2, 3, 0, 0),
                                      (2, 1, 0, -1, 0)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            C.elementary_cycle_pattern(*args)


class TestAlmostHighway:
    @pytest.mark.parametrize("k,i,steps", [(2, 1, 42), (2, 2, 34), (4, 3, 74)])
    def test_steps(self, k, i, steps):
        ah = C.almost_highway(k, i)
        assert ah.steps == steps == len(ah.trace)
        assert C.almost_highway_mismatch(k, i) is None

    def test_all_small(self):
        for k in range(1, 9):
            for i in range(1, 2 * k):
                assert C.almost_highway_mismatch(k, i) is None, (k, i)

    def test_period_arithmetic(self):
        for k in range(1, 9):
            assert len(C.almost_highway_trace(k, k)) == 16 * k + 2
            for i in range(1, k):
                n = len(C.almost_highway_trace(k, i)) + len(C.almost_highway_trace(k, 2 * k - i))
                assert n == 32 * k + 4

    def test_domain(self):
        with pytest.raises(ValueError):
            C.almost_highway(2, 4)


def formula_oracle(k, i, n):
    """The case formula evaluated cell by cell over a box."""
    pic = {}
    for x in range(-n - 3, n + 4):
        for y in range(-n - 4, n + 4):
            if y == n and x in (1 - n, 2 - n):
                v = i
            elif (x, y) == (1 - n, n - 1):
                v = i + 1
            elif (x, y) == (2 - n, n - 1):
                v = i - 1
            elif y == -x - 2 and -n <= x <= -1:
                v = 2 * k
            elif y == -x + 2 and 2 <= x <= n + 1:
                v = 2 * k - 1
            elif y == -x + 1 and 2 <= x <= n + 1:
                v = 2 * k - 2
            else:
                v = 0
            if v:
                pic[(x, y)] = v
    return Picture(pic)


class TestPicture:
    def test_k2_n0(self):
        c = C.l2kr_picture(2, 2, 0)
        assert c.picture == Picture({(1, 0): 2, (2, 0): 2, (1, -1): 3, (2, -1): 1})
        assert c.position == (0, 0) and c.direction == 1

    @pytest.mark.parametrize("k,i,n", [(2, 2, 1), (3, 1, 2), (4, 5, 3), (1, 1, 4)])
    def test_matches_formula(self, k, i, n):
        c = C.l2kr_picture(k, i, n)
        assert c.picture == formula_oracle(k, i, n)
        assert c.position == (-n, n)

    def test_one_period_moves_to_next_picture(self):
        for k in (2, 3):
            ant = Ant(C.l2kr_rule(k), C.l2kr_picture(k, k, 0))
            ant.advance(16 * k + 2)
            assert ant.configuration() == C.l2kr_picture(k, k, 1)


class TestL2kRHighways:
    @pytest.mark.parametrize("k,period", [(1, 18), (3, 50), (6, 98)])
    def test_fundamental(self, k, period):
        h = C.fundamental_highway(k)
        assert h.period == period and h.drift == (-1, 1)
        assert h.trace_cycle == tuple(C.almost_highway_trace(k, k))
        assert verify_highway(h)

    def test_harmonics(self):
        assert C.harmonic_highways(1) == []
        assert [h.period for h in C.harmonic_highways(2)] == [68]
        hs = C.harmonic_highways(3)
        assert len(hs) == 2 and all(h.period == 100 and h.drift == (-2, 2) for h in hs)
        assert len({canonicalise(h).key() for h in hs}) == 2

    def test_witness_factor(self):
        k = 5
        hs = C.harmonic_highways(k)
        for j, h in enumerate(hs, start=1):
            assert primitive_period(h.trace_cycle) == 32 * k + 4
            for i in range(1, k):
                assert C.contains_factor(h.trace_cycle, C.harmonic_witness(i)) == (i == j)
        t1 = C.almost_highway_trace(k, 1) + C.almost_highway_trace(k, 2 * k - 1)
        ext = t1 + t1[:3]
        assert sum(ext[j:j + 4] == [2, 0, 1, 0] for j in range(len(t1))) == 1

    def test_print(self):
        for k in (2, 3):
            for h in [C.fundamental_highway(k)] + C.harmonic_highways(k):
                diag = C.print_diagonals(h, 10)
                assert set(diag) == {2 * k, 2 * k - 1, 2 * k - 2}
                assert all(len(v) == 1 for v in diag.values())

    def test_l2k1r_k2(self):
        h = C.l2k1r_highway(2, budget=20)
        assert h.period == 84 and verify_highway(h)


class TestLLRLRL:
    @pytest.mark.parametrize("n,period", [(0, 220), (1, 244), (5, 340)])
    def test_periods(self, n, period):
        h = C.llrlrl_highway(n)
        assert h.period == period and h.drift == (-2, -2)

    def test_affine_period(self):
        ns = np.arange(9)
        ps = np.array([C.llrlrl_highway(int(n)).period for n in ns])
        slope, icept = np.polyfit(ns, ps, 1)
        assert np.allclose(ps, 24 * ns + 220)
        assert round(slope) == 24 and round(icept) == 220

    def test_first_pass_budgets(self):
        ws = C.load_widgets()
        b = C.first_pass_budgets(ws, 3)
        assert b == {"M1": 84, "L1[0]": 12, "L1[1]": 12, "L1[2]": 12}

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_links_alike_on_reaching_b1(self, n):
        ws = C.load_widgets()
        snap = C.stage_snapshot(ws, n)
        links = [snap[f"L1[{j}]"] for j in range(n)]
        assert all(p == links[0] for p in links[:-1])
        assert links[0] != ws.l1 and links[-1] != links[0]

    def test_recover_widgets_attaches_stages(self):
        ws = C.recover_widgets()
        assert set(ws.stages) == {"L2", "L2'", "M1 rewritten"}

    def test_fixtures_match_mined_oracle(self):
        mined = C.mine_widgets(runs=(3259, 14466))
        ws = C.load_widgets()
        assert (mined.m1, mined.l1, mined.b1) == (ws.m1, ws.l1, ws.b1)
        assert mined.link_shift == ws.link_shift and mined.start == ws.start

    def test_fixture_round_trip(self, tmp_path):
        ws = C.load_widgets()
        C.write_widget_fixtures(ws, tmp_path)
        again = C.load_widgets(tmp_path)
        assert (again.m1, again.l1, again.b1, again.link_shift) == (ws.m1, ws.l1, ws.b1, ws.link_shift)

    def test_negative_n(self):
        with pytest.raises(ValueError):
            C.llrlrl_highway(-1)
