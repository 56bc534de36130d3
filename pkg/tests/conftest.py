import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from torva import LieAlgebraSpec, ModeWindow, Session

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def sl2_spec():
    return LieAlgebraSpec.from_file(os.path.join(CONFIG_DIR, "sl2.json"))


def abelian_spec():
    return LieAlgebraSpec.from_file(os.path.join(CONFIG_DIR, "abelian.json"))


@pytest.fixture(scope="session")
def sl2():
    return sl2_spec()


@pytest.fixture(scope="session")
def abelian():
    return abelian_spec()


@pytest.fixture(scope="session")
def session_l1(sl2):
    return Session(sl2, 1, 1)


@pytest.fixture(scope="session")
def session_l0(sl2):
    return Session(sl2, 1, 0)


@pytest.fixture(scope="session")
def session_lneg2(sl2):
    return Session(sl2, 1, -2)


@pytest.fixture(scope="session")
def session_r2(sl2):
    return Session(sl2, 2, 1)


def small_window(session, m0=(-2, 2), box=(-1, 1), extra_states=()):
    states = [session.vacuum(), session.tail(session.spec.basis[0])]
    states += list(extra_states)
    return ModeWindow(m0, [list(box)] * session.r, states)


@pytest.fixture()
def win_l1(session_l1):
    return small_window(session_l1,
                        extra_states=[session_l1.parse_state("f(-1;0) vac")])
