"""A single dual-rail multiplexer as a chemical reaction network.

Prints the 16 reactions of one gate, then simulates all eight input
combinations and shows the settled output next to Z = A.~S + B.S.
"""

import itertools

from molpuf.crn import serialize_crn
from molpuf.kinetics import IntegratorConfig, integrate
from molpuf.mux import initial_output_state, logic_inputs, single_mux

crn, ports = single_mux(rate=16.0)
print(serialize_crn(crn, ["one 2-to-1 MUX, rate 16"]))

print(" A B S | Z  Z_0(nM)  Z_1(nM)")
for a, b, s in itertools.product((0, 1), repeat=3):
    init = {**logic_inputs("A", a), **logic_inputs("B", b), **logic_inputs("S", s),
            **initial_output_state(ports)}
    final = integrate(crn, init, IntegratorConfig(max_horizon=10.0)).final.concentrations
    z0, z1 = (final[crn.index(n)] for n in ports.output)
    print(f" {a} {b} {s} | {int(z1 > z0)}  {z0:7.3f}  {z1:7.3f}")
