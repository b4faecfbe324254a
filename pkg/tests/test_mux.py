import itertools

import numpy as np
import pytest

from molpuf.crn import Crn, dual_rail, validate
from molpuf.kinetics import IntegratorConfig, integrate
from molpuf.mux import (MuxPorts, MuxSpec, NotSettledError, initial_output_state, logic_inputs,
                        single_mux, synthesize_mux, truth_table_eval)


def test_one_mux_adds_sixteen_reactions():
    crn, ports = single_mux(16.2)
    assert len(crn.reactions) == 16
    assert all(r.forward_rate == 16.2 for r in crn.reactions)
    rev = [r for r in crn.reactions if r.reversible]
    assert len(rev) == 4 and all(r.reverse_rate == 1e5 for r in rev)


def test_private_species():
    crn, ports = single_mux()
    assert len(ports.internals + ports.output) == 8
    assert len(crn.species) == 6 + 8


def test_select_reactions_regenerate_inputs():
    crn, ports = single_mux()
    boundary = {crn.index(n) for n in ports.a + ports.b + ports.s}
    select = crn.reactions[4:12]
    for r in select:
        net = r.net()
        assert not set(net) & {crn.index(n) for n in ports.s}
        released = {s for s, c in net.items() if s in boundary}
        assert len(released) == 2 and all(net[s] == 1 for s in released)
        consumed = [s for s, c in net.items() if c < 0]
        assert [crn.names[s] for s in consumed][0] in ports.complexes
        assert sum(c for _, c in r.reactants) == 2
    # binding consumes inputs reversibly; no reaction creates an input from nothing
    for r in crn.reactions:
        for s, c in r.net().items():
            if s in boundary and c > 0:
                assert r.reversible or r in select


def test_no_autocatalysis():
    """No reaction has a species on both sides with net gain (no bistable feedback)."""
    crn, _ = single_mux()
    for r in crn.reactions:
        lhs = {s for s, _ in r.reactants}
        for s, c in r.net().items():
            assert not (s in lhs and c > 0)


def test_internal_clash_rejected():
    crn, ports = single_mux()
    with pytest.raises(ValueError):
        synthesize_mux(MuxSpec(1, "top", 16.0), ports, crn)


def test_mux_spec_checks():
    with pytest.raises(ValueError):
        MuxSpec(1, "left", 16.0)
    with pytest.raises(ValueError):
        MuxSpec(1, "top", 0.0)


def test_initial_output_state():
    _, ports = single_mux()
    st = initial_output_state(ports)
    assert st[ports.output[0]] == 100.0 and st[ports.output[1]] == 0.0
    assert all(st[n] == 0.0 for n in ports.internals)
    assert initial_output_state(ports) == st


@pytest.mark.parametrize("a,b,s", list(itertools.product((0, 1), repeat=3)))
def test_truth_table(a, b, s):
    assert truth_table_eval(a, b, s) == (a & (1 - s)) | (b & s)


def test_not_settled():
    with pytest.raises(NotSettledError):
        truth_table_eval(0, 1, 1, config=IntegratorConfig(max_horizon=0.01))


def test_conservation_all_inputs():
    crn, ports = single_mux()
    idx = {n: i for i, n in enumerate(crn.names)}
    for a, b, s in itertools.product((0, 1), repeat=3):
        init = {**logic_inputs("A", a), **logic_inputs("B", b), **logic_inputs("S", s),
                **initial_output_state(ports)}
        traj = integrate(crn, init, IntegratorConfig(max_horizon=10.0))
        x = traj.states
        z = x[:, idx[ports.output[0]]] + x[:, idx[ports.output[1]]]
        cx = x[:, [idx[n] for n in ports.complexes]].sum(axis=1)
        asum = x[:, idx["A_0"]] + x[:, idx["A_1"]] + cx
        bsum = x[:, idx["B_0"]] + x[:, idx["B_1"]] + cx
        ssum = x[:, idx["S_0"]] + x[:, idx["S_1"]]
        for v in (z, asum, bsum, ssum):
            assert np.abs(v - 100).max() < 1e-3


def test_aliasing_two_gates_validates():
    crn = Crn()
    a, b, s = dual_rail("A"), dual_rail("B"), dual_rail("S")
    p1 = MuxPorts.for_instance(a, b, s, "@x")
    synthesize_mux(MuxSpec(1, "top", 16.0), p1, crn)
    p2 = MuxPorts.for_instance(p1.output, a, s, "@y")
    synthesize_mux(MuxSpec(2, "top", 16.0), p2, crn)
    assert validate(crn).ok
    assert crn.index(p1.output[1]) == crn.index(p2.a[1])
