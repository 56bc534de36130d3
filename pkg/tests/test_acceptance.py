"""Acceptance suite: one test per criterion, exact checks at desk scale,
each with its stated wall-clock budget.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
pass lines and timings.
"""

import random
import time
from fractions import Fraction

import pytest

from torva import (ModeWindow, Session, loop_affine_graded_dims,
                   run_mutation_suite, validate_lie_spec)
from torva.axioms import (AxiomChecker, check_jacobi, check_skew_symmetry,
                          check_vacuum_expansion, expected_locality,
                          sample_toroidal)
from torva.states import ShiftedModule

from conftest import abelian_spec, sl2_spec

LEVELS = (0, 1, -2)


class Criterion:
    def __init__(self, number, name, budget_s):
        self.number, self.name, self.budget = number, name, budget_s
        self.t0 = time.perf_counter()

    def done(self):
        dt = time.perf_counter() - self.t0
        status = "PASS" if dt < self.budget else "SLOW"
        print(f"\nACCEPTANCE {self.number} [{self.name}]: {status} in {dt:.2f}s "
              f"(budget {self.budget}s)")
        assert dt < self.budget, f"criterion {self.number} exceeded {self.budget}s ({dt:.2f}s)"


def bounded_state(session, rng, box, allow_tail=True):
    """A random nonzero state of degree <= 2 with word modes in the box."""
    choice = rng.randrange(5 if allow_tail else 3)
    dim = session.spec.dim
    rnd_m = lambda: tuple(rng.randrange(lo, hi + 1) for lo, hi in box)
    a = session.spec.basis[rng.randrange(dim)]
    b = session.spec.basis[rng.randrange(dim)]
    if choice == 0:
        st = session.monomial([(1, a, rnd_m())])
    elif choice == 1:
        st = session.monomial([(2, a, rnd_m())])
    elif choice == 2:
        st = session.monomial([(1, a, rnd_m()), (1, b, rnd_m())])
    elif choice == 3:
        st = session.tail(a)
    else:
        st = session.monomial([(1, a, rnd_m())], b)
    if st.is_zero():
        return bounded_state(session, rng, box, allow_tail)
    return st.scaled(rng.choice([1, 1, -1, 2, Fraction(1, 2)]))


def test_criterion_1_lie_layer():
    c = Criterion(1, "lie layer", 5)
    assert validate_lie_spec(sl2_spec()).ok
    assert validate_lie_spec(abelian_spec()).ok
    rng = random.Random(101)
    for spec, r in ((sl2_spec(), 1), (sl2_spec(), 2), (abelian_spec(), 1)):
        s = Session(spec, r, 1)
        br = s.algebra.bracket
        n = 100 if r == 1 else 40
        for _ in range(n):
            x, y, z = (sample_toroidal(s, rng, 3) for _ in range(3))
            assert (br(br(x, y), z) + br(br(y, z), x) + br(br(z, x), y)).is_zero()
    c.done()


def test_criterion_2_base_action_table():
    c = Criterion(2, "generator product table", 10)
    for level in LEVELS:
        s = Session(sl2_spec(), 1, level)
        for a in s.spec.basis:
            for b in s.spec.basis:
                for m in [(m1,) for m1 in range(-2, 3)]:
                    for m0 in range(0, 5):
                        got = s.product(s.tail(a), m0, m, s.tail(b))
                        assert got == s.expected_generator_product(a, m0, b), \
                            (level, a, b, m0, m)
    c.done()


def test_criterion_3_locality_orders():
    c = Criterion(3, "locality orders", 30)
    for spec in (sl2_spec(), abelian_spec()):
        for level in LEVELS:
            s = Session(spec, 1, level)
            win = ModeWindow([-4, 4], [[-2, 2]],
                             [s.vacuum(), s.tail(s.spec.basis[0]),
                              s.monomial([(1, s.spec.basis[-1], (0,))])])
            for a in s.spec.basis:
                for b in s.spec.basis:
                    k = s.fields.locality_order(s.fields.current(a), s.fields.current(b), win)
                    kind, val = expected_locality(s, a, b)
                    assert k is not None, (a, b, level)
                    if kind == "exact":
                        assert k == val, (a, b, level, k, val)
                    else:
                        assert k <= val, (a, b, level, k, val)
    c.done()


def test_criterion_4_oracle_equivalence():
    c = Criterion(4, "product oracle equivalence", 120)
    s = Session(sl2_spec(), 1, 1)
    win = ModeWindow([-3, 3], [[-2, 2]], [s.vacuum(), s.tail("e")])
    fs = s.fields
    cur = {b: fs.current(b) for b in s.spec.basis}
    for a in s.spec.basis:
        for b in s.spec.basis:
            for (m0, m) in win.modes():
                prod = fs.product(cur[a], m0, m, cur[b], window=win)
                for (k0, k) in win.modes():
                    for w in win.states:
                        assert (fs.mode(prod, k0, k, w)
                                == fs.residue_oracle_mode(cur[a], m0, m, cur[b], k0, k, w)), \
                            (a, b, m0, m, k0, k)
    rng = random.Random(104)
    modes = list(win.modes())
    deep = []
    for _ in range(20):
        a, b = rng.choice(list(cur.values())), rng.choice(list(cur.values()))
        (m0, m) = rng.choice(modes)
        deep.append(fs.product(a, m0, m, b, window=win))
    for t in range(20):
        left = deep[t]
        right = rng.choice(list(cur.values()) + deep[:4])
        (p0, p) = rng.choice(modes)
        prod = fs.product(left, p0, p, right, window=win)
        for _ in range(6):
            (k0, k) = rng.choice(modes)
            w = rng.choice(win.states)
            assert fs.mode(prod, k0, k, w) == fs.residue_oracle_mode(left, p0, p, right, k0, k, w)
    c.done()


def _jacobi_battery(spec, r, level, rng, random_triples, box_half=1):
    s = Session(spec, r, level)
    box = [[-box_half, box_half]] * r
    win = ModeWindow([-2, 2], box, [s.vacuum(), s.tail(s.spec.basis[0])])
    ch = AxiomChecker(s)
    gens = [s.tail(b) for b in s.spec.basis]
    for u in gens:
        for v in gens:
            for w in gens:
                f = check_jacobi(ch, u, v, w, win, rng=rng, spot_checks=4)
                assert f.ok, (r, level, f.witness)
    for _ in range(random_triples):
        u = bounded_state(s, rng, win.m_box)
        v = bounded_state(s, rng, win.m_box)
        w = bounded_state(s, rng, win.m_box)
        f = check_jacobi(ch, u, v, w, win, rng=rng, spot_checks=3)
        assert f.ok, (r, level, f.witness)


def test_criterion_5_jacobi_identity():
    c = Criterion(5, "jacobi identity at r=1 and r=2", 300)
    _jacobi_battery(sl2_spec(), 1, 1, random.Random(105), 20, box_half=2)
    _jacobi_battery(sl2_spec(), 2, 1, random.Random(205), 20)
    _jacobi_battery(sl2_spec(), 1, 0, random.Random(405), 4)
    _jacobi_battery(sl2_spec(), 1, -2, random.Random(505), 4)
    _jacobi_battery(abelian_spec(), 1, 1, random.Random(305), 5)
    c.done()


def test_criterion_6_vacuum_expansion():
    c = Criterion(6, "vacuum expansion suite", 60)
    s = Session(sl2_spec(), 1, 1)
    win = ModeWindow([-2, 2], [[-1, 1]], [s.vacuum(), s.tail("e")])
    ch = AxiomChecker(s)
    rng = random.Random(106)
    # shifted-current identity exact for all generators (order-0 case included
    # in the trio), then >= 10 states of depth <= 2
    states = [s.tail(b) for b in s.spec.basis]
    states += [bounded_state(s, rng, win.m_box) for _ in range(10)]
    for u in states:
        f = check_vacuum_expansion(ch, u, win)
        assert f.ok, f.witness
    c.done()


def test_criterion_7_skew_symmetry():
    c = Criterion(7, "skew symmetry", 120)
    s = Session(sl2_spec(), 1, 1)
    win = ModeWindow([-2, 2], [[-1, 1]], [s.vacuum(), s.tail("e")])
    ch = AxiomChecker(s)
    for a in s.spec.basis:
        for b in s.spec.basis:
            f = check_skew_symmetry(ch, s.tail(a), s.tail(b), win)
            assert f.ok, (a, b, f.witness)   # includes the double-application check
    c.done()


def test_criterion_8_vacuum_ideal_matches_affine():
    c = Criterion(8, "vacuum ideal = loop affinisation", 120)
    s = Session(sl2_spec(), 1, 1)
    win = ModeWindow([-2, 2], [[-1, 1]], [s.vacuum(), s.tail("e")])
    ideal = s.build_vacuum_ideal(3, win)
    assert ideal.tail_free()
    box = 3
    counts = loop_affine_graded_dims(lambda k: s.spec.dim * box if k <= 2 else 0, 3)
    for d in range(4):
        assert ideal.graded_dims.get(d, 0) == counts[d], (d, ideal.graded_dims, counts)
    # one-variable commutators realise the loop-algebra affinisation
    vac = s.vacuum()
    rng = random.Random(108)
    box_vals = [(m1,) for m1 in range(-1, 2)]
    for a in s.spec.basis:
        for b in s.spec.basis:
            for m in box_vals:
                for n in box_vals:
                    u = s.product(s.tail(a), -1, m, vac)
                    v = s.product(s.tail(b), -1, n, vac)
                    for p0 in range(-2, 3):
                        for q0 in range(-2, 3):
                            w = rng.choice(win.states)
                            lhs = (s.ordinary_mode(u, p0, s.ordinary_mode(v, q0, w))
                                   - s.ordinary_mode(v, q0, s.ordinary_mode(u, p0, w)))
                            br = s.product(s.tail(a), 0, m, s.tail(b))
                            rhs = (s.ordinary_mode(s.product(br, -1, tuple(x + y for x, y in zip(m, n)), vac),
                                                   p0 + q0, w) if br else br)
                            if tuple(x + y for x, y in zip(m, n)) == (0,) and p0 + q0 == 0:
                                ai, bi = s.spec.index_of(a), s.spec.index_of(b)
                                rhs = rhs + w.scaled(Fraction(p0) * s.spec.pairing_basis(ai, bi) * s.level)
                            assert lhs == rhs, (a, b, m, n, p0, q0)
    # reconstruction: modes of u recovered from its (-1, n) vacuum products
    samples = [s.tail(b) for b in s.spec.basis] + [bounded_state(s, rng, win.m_box) for _ in range(4)]
    for u in samples:
        for (n0, n) in win.modes():
            w = rng.choice(win.states)
            piece = s.product(u, -1, n, vac)
            through = s.ordinary_mode(piece, n0, w) if piece else piece
            assert s.vertex_mode(u, n0, n, w) == through
    c.done()


def test_criterion_9_module_theorem():
    c = Criterion(9, "restricted modules as module structures", 120)
    s = Session(sl2_spec(), 1, 1)
    win = ModeWindow([-2, 2], [[-1, 1]], [s.vacuum(), s.tail("e"),
                                          s.parse_state("f(-1;0) vac")])
    rng = random.Random(109)
    for module in (s.module, ShiftedModule(s.module, (1,))):
        ch = AxiomChecker(s, module=module)
        gens = [s.tail(b) for b in s.spec.basis]
        triples = [(u, v, w) for u in gens for v in gens for w in gens]
        rng.shuffle(triples)
        for (u, v, w) in triples[:10]:
            f = check_jacobi(ch, u, v, w, win, rng=rng, spot_checks=3)
            assert f.ok, f.witness
        for _ in range(6):
            u, v = bounded_state(s, rng, win.m_box), bounded_state(s, rng, win.m_box)
            w = bounded_state(s, rng, win.m_box)
            f = check_jacobi(ch, u, v, w, win, rng=rng, spot_checks=3)
            assert f.ok, f.witness
        # restrictedness witnesses hold for every tested state
        for st in win.states:
            d = st.max_degree()
            for a in range(s.spec.dim):
                for n in win.m_values():
                    for n0 in range(d + 1, d + 4):
                        assert module.act(a, n0, n, st).is_zero()
    c.done()


def test_criterion_10_mutation_sensitivity():
    c = Criterion(10, "mutation sensitivity", 300)
    s = Session(sl2_spec(), 1, 1)
    win = ModeWindow([-2, 2], [[-1, 1]], [s.vacuum(), s.tail("e")])
    rep = run_mutation_suite(s, win, seed=110)
    assert rep.ok, [f.detail for f in rep.findings if not f.ok]
    assert len(rep.findings) == 14
    c.done()
