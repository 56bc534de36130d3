"""Field engine: locality, products, derivatives, closure, the residue oracle."""

import random
from fractions import Fraction

import pytest

from torva import LocalityError, ModeWindow, Session

from conftest import abelian_spec, sl2_spec, small_window


@pytest.fixture(scope="module")
def s():
    return Session(sl2_spec(), 1, 1)


@pytest.fixture(scope="module")
def win(s):
    return small_window(s, extra_states=[s.parse_state("f(-1;0) vac")])


def currents(s):
    return {b: s.fields.current(b) for b in s.spec.basis}


def test_locality_orders_level1(s, win):
    cur = currents(s)
    fs = s.fields
    assert fs.locality_order(cur["e"], cur["f"], win) == 2
    assert fs.locality_order(cur["h"], cur["h"], win) == 2
    assert fs.locality_order(cur["h"], cur["e"], win) == 1
    assert fs.locality_order(cur["e"], cur["e"], win) == 0
    assert fs.locality_order(fs.identity(), cur["f"], win) == 0


def test_locality_orders_level0():
    s0 = Session(sl2_spec(), 1, 0)
    win0 = small_window(s0, extra_states=[s0.parse_state("f(-1;0) vac")])
    cur = currents(s0)
    assert s0.fields.locality_order(cur["e"], cur["f"], win0) <= 1
    assert s0.fields.locality_order(cur["h"], cur["h"], win0) == 0


def test_locality_minimality(s, win):
    # the reported order passes and the one below it fails somewhere
    cur = currents(s)
    fs = s.fields
    k = fs.locality_order(cur["e"], cur["f"], win)
    assert fs.locality_passes_at(cur["e"], cur["f"], k, win) is None
    assert fs.locality_passes_at(cur["e"], cur["f"], k + 1, win) is None
    assert fs.locality_passes_at(cur["e"], cur["f"], k - 1, win) is not None


def test_locality_bound_exceeded_raises(s, win):
    cur = currents(s)
    assert s.fields.locality_order(cur["e"], cur["f"], win, bound=1) is None
    with pytest.raises(LocalityError):
        s.fields.product(cur["e"], 0, (0,), cur["f"], window=win, bound=1)


def test_empty_window_rejected(s):
    from torva import SpecFormatError
    with pytest.raises(SpecFormatError):
        ModeWindow([1, 0], [[-1, 1]], [s.vacuum()])
    with pytest.raises(SpecFormatError):
        ModeWindow([0, 1], [[-1, 1]], [])


def test_product_table_modes(s, win):
    cur = currents(s)
    fs = s.fields
    vac = s.vacuum()
    p0 = fs.product(cur["e"], 0, (1,), cur["f"], window=win)
    # [e,f]-current: on the vacuum its (-1, n) mode creates h(-1, n)
    assert fs.mode(p0, -1, (0,), vac) == s.monomial([(1, "h", (0,))])
    p1 = fs.product(cur["e"], 1, (0,), cur["f"], window=win)
    assert fs.mode(p1, -1, (0,), vac) == vac  # level * <e,f> * identity
    assert fs.mode(p1, 0, (0,), vac).is_zero()
    p2 = fs.product(cur["e"], 2, (0,), cur["f"], window=win)
    for (k0, k) in win.modes():
        for w in win.states:
            assert fs.mode(p2, k0, k, w).is_zero()


def test_identity_products(s, win):
    fs = s.fields
    one = fs.identity()
    b = fs.current("f")
    for (m0, m) in win.modes():
        prod = fs.product(one, m0, m, b, window=win)
        for (k0, k) in win.modes():
            for w in win.states:
                got = fs.mode(prod, k0, k, w)
                want = fs.mode(b, k0, k, w) if (m0, m) == (-1, (0,)) else None
                if want is None:
                    assert got.is_zero()
                else:
                    assert got == want


def test_product_against_identity_vanishes_for_annihilation(s, win):
    fs = s.fields
    one = fs.identity()
    a = fs.current("e")
    for m0 in range(0, 3):
        prod = fs.product(a, m0, (0,), one, window=win)
        for (k0, k) in win.modes():
            for w in win.states:
                assert fs.mode(prod, k0, k, w).is_zero()


def test_oracle_equivalence_generators(s, win):
    fs = s.fields
    cur = currents(s)
    rng = random.Random(4)
    pairs = [(a, b) for a in cur for b in cur]
    for (a, b) in pairs:
        ha, hb = cur[a], cur[b]
        for (m0, m) in win.modes():
            prod = fs.product(ha, m0, m, hb, window=win)
            for (k0, k) in win.modes():
                w = rng.choice(win.states)
                assert fs.mode(prod, k0, k, w) == fs.residue_oracle_mode(ha, m0, m, hb, k0, k, w)


def test_oracle_equivalence_nested(s, win):
    fs = s.fields
    cur = currents(s)
    rng = random.Random(5)
    modes = list(win.modes())
    for _ in range(10):
        a, b, c = (cur[rng.choice("efh")] for _ in range(3))
        (m0, m) = rng.choice(modes)
        inner = fs.product(a, m0, m, b, window=win)
        (p0, p) = rng.choice(modes)
        outer = fs.product(inner, p0, p, c, window=win)
        for _ in range(5):
            (k0, k) = rng.choice(modes)
            w = rng.choice(win.states)
            assert fs.mode(outer, k0, k, w) == fs.residue_oracle_mode(inner, p0, p, c, k0, k, w)


def test_derivative_mode_rules(s, win):
    fs = s.fields
    a = fs.current("e")
    d0 = fs.derivative(0, a)
    d1 = fs.derivative(1, a)
    w = s.parse_state("f(-1;0) vac")
    for (n0, n) in win.modes():
        assert fs.mode(d0, n0, n, w) == fs.mode(a, n0 - 1, n, w).scaled(-n0)
        assert fs.mode(d1, n0, n, w) == fs.mode(a, n0, n, w).scaled(-n[0])
    dd = fs.derivative(0, fs.derivative(0, a))
    for (n0, n) in win.modes():
        assert fs.mode(dd, n0, n, w) == fs.mode(a, n0 - 2, n, w).scaled(n0 * (n0 - 1))


def test_derivative_of_identity_vanishes(s, win):
    fs = s.fields
    for i in (0, 1):
        d = fs.derivative(i, fs.identity())
        for (n0, n) in win.modes():
            for w in win.states:
                assert fs.mode(d, n0, n, w).is_zero()


def test_derivative_out_of_range(s):
    from torva import SpecFormatError
    with pytest.raises(SpecFormatError):
        s.fields.derivative(5, s.fields.current("e"))


def test_derivative_product_shifts(s, win):
    # first-slot rules through the product: (D0 a)_(m0,m) b = -m0 a_(m0-1,m) b
    fs = s.fields
    a, b = fs.current("e"), fs.current("f")
    for (m0, m) in [(0, (0,)), (1, (1,)), (-1, (0,)), (2, (-1,))]:
        lhs = fs.product(fs.derivative(0, a), m0, m, b, window=win)
        ref = fs.product(a, m0 - 1, m, b, window=win)
        for (k0, k) in win.modes():
            for w in win.states:
                assert fs.mode(lhs, k0, k, w) == fs.mode(ref, k0, k, w).scaled(-m0)
        lhs1 = fs.product(fs.derivative(1, a), m0, m, b, window=win)
        ref1 = fs.product(a, m0, m, b, window=win)
        for (k0, k) in win.modes():
            for w in win.states:
                assert fs.mode(lhs1, k0, k, w) == fs.mode(ref1, k0, k, w).scaled(-m[0])


def test_transfer_check_pass_and_fail(s, win):
    from torva.axioms import _bracket_current, _scaled_identity
    fs = s.fields
    a, b = fs.current("e"), fs.current("f")
    c0 = _bracket_current(s, 0, 1)
    c1 = _scaled_identity(fs, Fraction(1))   # level * <e,f> = 1
    ok, fails = fs.transfer_check(a, b, [c0, c1], (0,), win)
    assert ok, fails
    wrong = _scaled_identity(fs, Fraction(2))
    ok, fails = fs.transfer_check(a, b, [c0, wrong], (0,), win)
    assert not ok
    assert all(f["j"] == 1 for f in fails)


def test_transfer_check_abelian_trivial():
    s0 = Session(abelian_spec(), 1, 0)
    win0 = small_window(s0)
    fs = s0.fields
    a = fs.current("a")
    ok, fails = fs.transfer_check(a, a, [], (0,), win0)
    assert ok, fails


def test_termination_guard():
    from torva import TerminationError
    tiny = Session(sl2_spec(), 1, 1, term_bound=1)
    win_t = small_window(tiny, extra_states=[tiny.parse_state("f(-1;0) e(-1;0) vac")])
    fs = tiny.fields
    prod = fs.product(fs.current("e"), -3, (0,), fs.current("f"))
    with pytest.raises(TerminationError):
        fs.mode(prod, -1, (0,), win_t.states[-1])


def test_generate_identity_only(s):
    win = small_window(s, m0=(-1, 1))
    space = s.fields.generate([], 3, win)
    assert space.labels() == ["1"]


def test_generate_depth1_closure(s):
    win = ModeWindow([-1, 1], [[0, 0]], [s.vacuum(), s.tail("e")])
    cur = currents(s)
    space = s.fields.generate(list(cur.values()), 1, win)
    assert "1" in space.labels()
    # every pair local within a small order
    assert max(space.locality_orders.values()) <= 4
    # order-0 products are bracket currents: [h,e] = 2e shows up as a new
    # handle whose window modes are twice the e-current's
    fs = s.fields

    def fingerprint(h):
        return tuple(fs.mode(h, m0, m, w) for (m0, m) in win.modes() for w in win.states)

    doubled_e = tuple(st.scaled(2) for st in fingerprint(cur["e"]))
    assert any(fingerprint(h) == doubled_e for h in space.handles)
    # the order-1 product of e and f collapses to level * identity, already
    # present as the seed identity handle at level 1
    one_fp = fingerprint(fs.identity())
    assert any(fingerprint(h) == one_fp for h in space.handles)
    # order-insensitivity: permuting the generators yields the same mode sets
    space2 = s.fields.generate([cur["h"], cur["f"], cur["e"]], 1, win)

    def fps(space_):
        out = set()
        for h in space_.handles:
            out.add(tuple(s.fields.mode(h, m0, m, w)
                          for (m0, m) in win.modes() for w in win.states))
        return out
    assert fps(space) == fps(space2)


def test_generate_surfaces_locality_failure(s):
    win = ModeWindow([-1, 1], [[0, 0]], [s.vacuum(), s.tail("e")], locality_bound=1)
    cur = currents(s)
    with pytest.raises(LocalityError):
        s.fields.generate([cur["e"], cur["f"]], 1, win)


def test_generate_depth2_locality_bound(s):
    win = ModeWindow([0, 1], [[0, 0]], [s.vacuum(), s.tail("e")])
    cur = currents(s)
    space = s.fields.generate([cur["e"], cur["f"]], 2, win)
    assert max(space.locality_orders.values()) <= 4


def test_generated_products_match_closed_forms(s):
    win = ModeWindow([-1, 1], [[0, 0]], [s.vacuum(), s.tail("e"), s.tail("f")])
    cur = currents(s)
    space = s.fields.generate([cur["e"], cur["f"]], 1, win)
    # the m0=1 product of e and f collapses to the scaled identity; find it
    fs = s.fields
    prod = fs.product(cur["e"], 1, (0,), cur["f"], window=win)
    for w in win.states:
        assert fs.mode(prod, -1, (0,), w) == w  # level <e,f> = 1
