import numpy as np
import pytest

from langant.engine import (Ant, Configuration, OutOfSupportError, Pattern, Picture,
                            ResourceLimitError, RuleWord, apply_pattern_steps, dir_index,
                            rotate_left, rotate_right, run, step, unstep)


def conf(cells, pos=(0, 0), d=1):
    return Configuration(Picture(cells), pos, d)


class TestRuleWord:
    def test_parse_powers(self):
        assert str(RuleWord.parse("L6R")) == "LLLLLLR"
        assert str(RuleWord.parse("L^6R")) == "LLLLLLR"
        assert str(RuleWord.parse("L^{12}R")) == "L" * 12 + "R"
        assert str(RuleWord.parse("llrl")) == "LLRL"

    @pytest.mark.parametrize("bad", ["", "LXR", "L^R^", "2L"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            RuleWord.parse(bad)

    def test_nontrivial(self):
        assert RuleWord("LR").nontrivial
        assert not RuleWord("LLL").nontrivial
        assert len(RuleWord("LLRL")) == 4


def test_rotations():
    for d in range(4):
        assert rotate_left(rotate_left(rotate_left(rotate_left(d)))) == d
        assert rotate_right(rotate_left(d)) == d
    assert dir_index("N") == 1 and dir_index((0, -1)) == 3


class TestStep:
    def test_lr_first_step(self):
        c = step("LR", Configuration.white())
        assert c.picture == Picture({(0, 0): 1})
        assert c.position == (-1, 0) and c.direction == 2

    def test_lr_wraparound(self):
        c = step("LR", conf({(0, 0): 1}))
        assert len(c.picture) == 0
        assert c.position == (1, 0) and c.direction == 0

    def test_llr_right_turn(self):
        # right of east is south, so the ant moves one cell down
        c = step("LLR", conf({(0, 0): 2}, d=0))
        assert len(c.picture) == 0
        assert c.position == (0, -1) and c.direction == 3

    def test_step_is_pure(self):
        c = conf({(0, 0): 1})
        step("LR", c)
        assert c.picture == Picture({(0, 0): 1})

    def test_unstep_example(self):
        c = unstep("LR", conf({(0, 0): 1}, (-1, 0), 2))
        assert len(c.picture) == 0 and c.position == (0, 0) and c.direction == 1

    def test_unstep_inverts_10000_steps(self):
        c = Configuration.white()
        for _ in range(10_000):
            c = step("LR", c)
        for _ in range(10_000):
            c = unstep("LR", c)
        assert len(c.picture) == 0 and c.position == (0, 0) and c.direction == 1


class TestAnt:
    def test_matches_value_layer(self):
        rng = np.random.default_rng(3)
        start = conf({(int(x), int(y)): int(s) for x, y, s in
                      zip(rng.integers(-4, 5, 30), rng.integers(-4, 5, 30), rng.integers(0, 4, 30))})
        c = start.copy()
        for _ in range(3000):
            c = step("LLRL", c)
        ant = Ant("LLRL", start)
        ant.advance(3000)
        assert ant.configuration() == c

    def test_retreat_restores(self):
        ant = Ant("LRRL")
        ant.advance(50_000)
        ant.retreat(50_000)
        assert ant.nonzero == 0 and ant.position == (0, 0) and ant.direction == 1

    def test_tile_growth_across_far_cells(self):
        ant = Ant("LR", conf({(10_000, -10_000): 1, (-5, 7): 1}), tile_capacity=1)
        ant.advance(20_000)
        assert ant[(10_000, -10_000)] == 1
        assert ant.time == 20_000

    def test_resource_limit(self):
        ant = Ant("LR", max_cells=50)
        with pytest.raises(ResourceLimitError) as e:
            ant.advance(100_000)
        assert e.value.cap == 50

    def test_no_zero_entries_stored(self):
        ant = Ant("LLR")
        ant.advance(5000)
        assert all(v != 0 for _, v in ant.picture().items())
        assert len(ant.picture()) == ant.nonzero

    def test_tracking_records_read_cells(self):
        ant = Ant("LR")
        xs, ys = ant.advance_tracking(3)
        assert list(zip(xs.tolist(), ys.tolist())) == [(0, 0), (-1, 0), (-1, -1)]


class TestRun:
    def test_one_step_trace(self):
        _, tr = run("LR", Configuration.white(), 1)
        assert tr.tolist() == [0]

    def test_trace_length_and_displacement(self):
        c, tr = run("LR", Configuration.white(), 104)
        assert len(tr) == 104 and tr.complete
        assert c.position != (0, 0)

    def test_zero_steps_identity(self):
        start = conf({(1, 2): 1})
        c, tr = run("LR", start, 0)
        assert c == start and len(tr) == 0

    def test_ring_keeps_suffix_and_spill_has_all(self, tmp_path):
        full, tr_full = run("LLRL", Configuration.white(), 5000)
        c, tr = run("LLRL", Configuration.white(), 5000, trace_capacity=1024,
                    spill=tmp_path / "t.bin")
        assert c == full
        assert len(tr.symbols) == 1024 and not tr.complete
        assert tr.tolist() == tr_full.tolist()[-1024:]
        assert list((tmp_path / "t.bin").read_bytes()) == tr_full.tolist()

    def test_llrl_suffix_is_384_periodic(self):
        _, tr = run("LLRL", Configuration.white(), 260_000, trace_capacity=2048)
        s = tr.symbols
        assert np.array_equal(s[384:], s[:-384])

    def test_negative_steps(self):
        with pytest.raises(ValueError):
            run("LR", Configuration.white(), -1)


class TestApplyPatternSteps:
    def test_single_cell_exits_at_step_one(self):
        with pytest.raises(OutOfSupportError) as e:
            apply_pattern_steps("LR", Pattern({(0, 0): 0}), (0, 0), 1, 1)
        assert e.value.step_index == 1

    def test_start_outside_support(self):
        with pytest.raises(OutOfSupportError) as e:
            apply_pattern_steps("LR", Pattern({(1, 0): 0}), (0, 0), 1, 1)
        assert e.value.step_index == 0

    def test_agrees_with_step(self):
        p = Pattern({(x, y): 0 for x in range(-3, 4) for y in range(-3, 4)})
        trace = []
        q, pos, d = apply_pattern_steps("LR", p, (0, 0), 1, 10, trace)
        c, tr = run("LR", Configuration.white(), 10)
        assert pos == c.position and d == c.direction
        assert trace == tr.tolist()
        assert Picture(q.values) == c.picture
