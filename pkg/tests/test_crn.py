import math

import pytest
from hypothesis import given, strategies as st

from molpuf.crn import (Crn, CrnSyntaxError, DuplicateSpeciesError, RateError, Reaction,
                        ReactantCapError, UnknownSpeciesError, dual_rail, parse_crn,
                        serialize_crn, validate)
from molpuf.mux import MuxPorts, MuxSpec, single_mux, synthesize_mux


def test_add_species_counts_and_rejects_duplicates():
    crn = Crn()
    crn.add_species("Z0")
    assert len(crn.species) == 1
    with pytest.raises(DuplicateSpeciesError):
        crn.add_species("Z0")


def test_suffix_preserved_verbatim():
    crn = Crn()
    sp = crn.add_species("A1@s3t")
    assert sp.name == "A1@s3t"
    assert crn.species_named("A1@s3t") is sp


def test_unknown_species_lookup():
    with pytest.raises(UnknownSpeciesError):
        Crn().species_named("nope")


def test_binding_is_one_reversible_record():
    crn = Crn()
    for n in ("A0", "B0", "R1"):
        crn.add_species(n)
    crn.add_reaction(["A0", "B0"], ["R1"], 16.2, 1e5)
    assert len(crn.reactions) == 1
    r = crn.reactions[0]
    assert r.reversible and r.forward_rate == 16.2 and r.reverse_rate == 1e5


def test_reactant_cap():
    crn = Crn()
    for n in "XYWZ":
        crn.add_species(n)
    with pytest.raises(ReactantCapError):
        crn.add_reaction(["X", "Y", "W"], ["Z"], 1.0)
    with pytest.raises(ReactantCapError):
        crn.add_reaction(["X", "X", "Y"], ["Z"], 1.0)
    # the reverse direction of a reversible reaction is capped too
    with pytest.raises(ReactantCapError):
        crn.add_reaction(["X"], ["Y", "W", "Z"], 1.0, 1.0)


def test_catalytic_select_accepted():
    crn = Crn()
    for n in ("S0", "R1", "A0", "B0", "Z'0"):
        crn.add_species(n)
    crn.add_reaction(["S0", "R1"], ["S0", "A0", "B0", "Z'0"], 16)
    assert crn.index("S0") not in crn.reactions[0].net()


@pytest.mark.parametrize("kf", [0.0, -1.0, math.inf, math.nan])
def test_bad_rates_rejected(kf):
    crn = Crn()
    crn.add_species("A")
    with pytest.raises(RateError):
        crn.add_reaction(["A"], [], kf)


def test_add_reaction_requires_registered_species():
    crn = Crn()
    crn.add_species("A")
    with pytest.raises(UnknownSpeciesError):
        crn.add_reaction(["A"], ["B"], 1.0)


def test_parse_examples():
    c = parse_crn("A0 + B0 <-> R1 ; kf=16.2 ; kr=1e5")
    assert len(c.reactions) == 1 and c.reactions[0].reversible
    assert c.reactions[0].reverse_rate == 1e5
    c = parse_crn("Z'0 + Z1 -> Z0 ; kf=16")
    assert len(c.reactions) == 1 and not c.reactions[0].reversible
    c = parse_crn("")
    assert len(c.reactions) == 0 and len(c.species) == 0


def test_parse_comments_blank_lines_and_repetition():
    c = parse_crn("# header\n\nX + X -> Y ; kf=2.5  # dimerise\n -> X ; kf=1\n")
    assert len(c.reactions) == 2
    assert c.reactions[0].reactants == ((c.index("X"), 2),)
    assert c.reactions[1].reactants == ()


@pytest.mark.parametrize("text, line, column", [
    ("A -> B", 1, 7),
    ("A B -> C ; kf=1", 1, 1),
    ("\nA -> B ; kf=abc", 2, 9),
    ("A <-> B ; kf=1", 1, 15),
    ("A -> B ; kf=1 ; kr=2", 1, 21),
    ("A -> B ; rate=3", 1, 9),
])
def test_syntax_errors_carry_position(text, line, column):
    with pytest.raises(CrnSyntaxError) as ei:
        parse_crn(text)
    assert ei.value.line == line
    assert ei.value.column == column


def test_serialize_keeps_orphan_species():
    crn = Crn()
    crn.add_species("lonely")
    crn.add_species("A")
    crn.add_reaction(["A"], [], 1.0)
    assert parse_crn(serialize_crn(crn)) == crn


def test_mux_fragment_validates():
    crn, _ = single_mux()
    assert validate(crn).ok


def test_validate_flags_unregistered_species():
    crn = parse_crn("A -> B ; kf=1")
    crn.reactions.append(Reaction(((7, 1),), (), 1.0))
    rep = validate(crn)
    assert [v.kind for v in rep] == ["unregistered-species"]


def test_validate_flags_zero_rate():
    crn = parse_crn("A -> B ; kf=0", strict=False)
    rep = validate(crn)
    assert len(rep) == 1 and rep.violations[0].kind == "rate"


def test_validate_flags_missing_partner_rail():
    crn = parse_crn("X_0@s1t -> Y ; kf=1")
    assert [v.kind for v in validate(crn)] == ["dual-rail"]
    crn = parse_crn("X_0@s1t + X_1@s1t -> Y ; kf=1")
    assert validate(crn).ok


def test_dual_rail_names():
    assert dual_rail("Z", "@s3t") == ("Z_0@s3t", "Z_1@s3t")


# ---------------------------------------------------------------- properties

names = st.sampled_from(["A", "B", "C", "Z_0", "Z_1", "R1@s2t", "Z'_0@s1b", "S_1@s4"])
rate = st.floats(min_value=1e-12, max_value=1e12, allow_nan=False, allow_infinity=False)


@st.composite
def crns(draw):
    crn = Crn()
    for _ in range(draw(st.integers(0, 8))):
        lhs = draw(st.lists(names, max_size=2))
        rhs = draw(st.lists(names, max_size=2 if draw(st.booleans()) else 4))
        rev = len(rhs) <= 2 and draw(st.booleans())
        for n in lhs + rhs:
            crn.species_named(n, create=True)
        crn.add_reaction(lhs, rhs, draw(rate), draw(rate) if rev else None)
    for n in draw(st.lists(names, max_size=3)):
        crn.species_named(n, create=True)
    return crn


@given(crns())
def test_round_trip(crn):
    text = serialize_crn(crn)
    back = parse_crn(text)
    assert back == crn
    # rates survive bit-identically
    for a, b in zip(crn.reactions, back.reactions):
        assert a.forward_rate == b.forward_rate and a.reverse_rate == b.reverse_rate
    assert serialize_crn(back) == text


@given(crns(), st.integers(0, 3), st.data())
def test_validation_soundness(crn, corruption, data):
    """validate is empty exactly when no invariant was broken."""
    assert len(validate(crn).violations) == sum(
        1 for n in crn.names if validate_partner_missing(crn, n))
    if not crn.reactions:
        return
    j = data.draw(st.integers(0, len(crn.reactions) - 1))
    r = crn.reactions[j]
    before = len(validate(crn))
    if corruption == 0:
        crn.reactions[j] = Reaction(r.reactants, r.products, 0.0, r.reverse_rate)
    elif corruption == 1:
        crn.reactions[j] = Reaction(r.reactants + ((0, 1),) * 3, r.products, r.forward_rate, None)
    elif corruption == 2:
        crn.reactions[j] = Reaction(r.reactants + ((len(crn.species) + 5, 1),), (), r.forward_rate)
    else:
        crn.reactions[j] = Reaction(r.reactants, r.products, r.forward_rate, -1.0)
    assert len(validate(crn)) > before


def validate_partner_missing(crn, name):
    import re
    m = re.match(r"^(.+)_([01])(@\S*)?$", name)
    if not m:
        return False
    partner = f"{m[1]}_{1 - int(m[2])}{m[3] or ''}"
    return partner not in crn


def test_shared_boundary_species_are_identical():
    crn = Crn()
    a, b, s = dual_rail("A"), dual_rail("B"), dual_rail("S")
    p1 = MuxPorts.for_instance(a, b, s, "@s1t")
    p2 = MuxPorts.for_instance(b, a, s, "@s1b")
    synthesize_mux(MuxSpec(1, "top", 16.0), p1, crn)
    synthesize_mux(MuxSpec(1, "bottom", 16.0), p2, crn)
    assert set(p1.internals).isdisjoint(p2.internals)
    assert len(crn.species) == 6 + 2 * 8
    assert validate(crn).ok
