"""Species, reactions and whole chemical reaction networks.

A :class:`Crn` is built incrementally with :meth:`Crn.add_species` and
:meth:`Crn.add_reaction`, both of which enforce the network invariants.  The
dataclass constructor itself performs no checks, so a network read from an
untrusted source can be inspected with :func:`validate`.

Text format, one reaction per line::

    A_0 + B_0 <-> R1 ; kf=16.2 ; kr=1e5
    Z'_0 + Z_1 -> Z_0 ; kf=16

Coefficients are written by repetition (``X + X``), ``#`` starts a comment and
species are declared on first use.  A ``species:`` line declares species that
take part in no reaction.

Units throughout the package: concentrations in nM, time in seconds,
bimolecular rate constants in 1/(nM s), unimolecular ones in 1/s.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

MAX_REACTANTS = 2

_DUAL_RAIL = re.compile(r"^(?P<signal>.+)_(?P<rail>[01])(?P<suffix>@\S*)?$")
_NAME = re.compile(r"^[^\s+;#<>=]+$")


class CrnError(ValueError):
    """Raised when an operation would break a network invariant."""


class DuplicateSpeciesError(CrnError):
    pass


class UnknownSpeciesError(CrnError):
    pass


class ReactantCapError(CrnError):
    pass


class RateError(CrnError):
    pass


class CrnSyntaxError(CrnError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Species:
    id: int
    name: str

    def __str__(self):
        return self.name


Term = tuple[int, int]  # (species id, stoichiometric coefficient)


@dataclass(frozen=True)
class Reaction:
    reactants: tuple[Term, ...]
    products: tuple[Term, ...]
    forward_rate: float
    reverse_rate: float | None = None

    @property
    def reversible(self) -> bool:
        return self.reverse_rate is not None

    @property
    def order(self) -> int:
        return sum(c for _, c in self.reactants)

    def net(self) -> dict[int, int]:
        """Net stoichiometric change per species for the forward direction."""
        out: dict[int, int] = {}
        for s, c in self.reactants:
            out[s] = out.get(s, 0) - c
        for s, c in self.products:
            out[s] = out.get(s, 0) + c
        return {s: c for s, c in out.items() if c != 0}


SpeciesLike = Union[Species, str, int]


def _rate_ok(k) -> bool:
    return isinstance(k, (int, float)) and math.isfinite(k) and k > 0


@dataclass
class Crn:
    species: list[Species] = field(default_factory=list)
    reactions: list[Reaction] = field(default_factory=list)

    def __post_init__(self):
        self._by_name = {s.name: s for s in self.species}

    # -- species --------------------------------------------------------

    def add_species(self, name: str) -> Species:
        if not isinstance(name, str) or not _NAME.match(name):
            raise CrnError(f"invalid species name {name!r}")
        if name in self._by_name:
            raise DuplicateSpeciesError(f"species {name!r} already present")
        sp = Species(len(self.species), name)
        self.species.append(sp)
        self._by_name[name] = sp
        return sp

    def species_named(self, name: str, create: bool = False) -> Species:
        """Look a species up by name, registering it first if ``create``."""
        try:
            return self._by_name[name]
        except KeyError:
            if create:
                return self.add_species(name)
            raise UnknownSpeciesError(f"unknown species {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def index(self, name: str) -> int:
        return self.species_named(name).id

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.species]

    # -- reactions ------------------------------------------------------

    def _resolve(self, sp: SpeciesLike) -> int:
        if isinstance(sp, Species):
            if sp.id >= len(self.species) or self.species[sp.id] != sp:
                raise UnknownSpeciesError(f"species {sp.name!r} not registered here")
            return sp.id
        if isinstance(sp, str):
            return self.species_named(sp).id
        if isinstance(sp, int) and 0 <= sp < len(self.species):
            return sp
        raise UnknownSpeciesError(f"unknown species {sp!r}")

    def _terms(self, side: Iterable[SpeciesLike]) -> tuple[Term, ...]:
        counts: dict[int, int] = {}
        for sp in side:
            i = self._resolve(sp)
            counts[i] = counts.get(i, 0) + 1
        return tuple(counts.items())

    def add_reaction(
        self,
        reactants: Sequence[SpeciesLike],
        products: Sequence[SpeciesLike],
        kf: float,
        kr: float | None = None,
    ) -> int:
        """Append a reaction and return its index.

        ``reactants`` and ``products`` list species with repetition standing
        for stoichiometric coefficients.  A reverse rate makes the reaction
        reversible; it is stored as a single record.
        """
        if len(reactants) > MAX_REACTANTS:
            raise ReactantCapError(
                f"{len(reactants)} reactants; at most {MAX_REACTANTS} allowed"
            )
        if not _rate_ok(kf):
            raise RateError(f"forward rate must be positive and finite, got {kf!r}")
        if kr is not None and not _rate_ok(kr):
            raise RateError(f"reverse rate must be positive and finite, got {kr!r}")
        if kr is not None and len(products) > MAX_REACTANTS:
            raise ReactantCapError("reverse direction exceeds the reactant cap")
        rxn = Reaction(self._terms(reactants), self._terms(products), float(kf),
                       None if kr is None else float(kr))
        self.reactions.append(rxn)
        return len(self.reactions) - 1

    # -- misc -----------------------------------------------------------

    def with_rates(self, rates: Sequence[tuple[float, float | None]]) -> Crn:
        """Copy of this network with every reaction's rates replaced."""
        if len(rates) != len(self.reactions):
            raise CrnError("one (kf, kr) pair per reaction required")
        out = Crn(list(self.species))
        for r, (kf, kr) in zip(self.reactions, rates):
            if not _rate_ok(kf) or (kr is not None and not _rate_ok(kr)):
                raise RateError(f"nonpositive rate in ({kf!r}, {kr!r})")
            out.reactions.append(Reaction(r.reactants, r.products, float(kf),
                                          None if kr is None else float(kr)))
        return out

    def format_reaction(self, r: Reaction) -> str:
        def side(terms):
            return " + ".join(
                " + ".join([self.species[s].name] * c) for s, c in terms
            )

        arrow = "<->" if r.reversible else "->"
        text = f"{side(r.reactants)} {arrow} {side(r.products)}".strip()
        text += f" ; kf={r.forward_rate!r}"
        if r.reversible:
            text += f" ; kr={r.reverse_rate!r}"
        return text

    def _signature(self):
        def named(terms):
            return tuple((self.species[s].name, c) for s, c in terms)

        return (
            frozenset(self.names),
            tuple(
                (named(r.reactants), named(r.products), r.forward_rate, r.reverse_rate)
                for r in self.reactions
            ),
        )

    def __eq__(self, other):
        if not isinstance(other, Crn):
            return NotImplemented
        return self._signature() == other._signature()

    def __repr__(self):
        return f"Crn({len(self.species)} species, {len(self.reactions)} reactions)"


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    reaction: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)


def validate(crn: Crn) -> ValidationReport:
    """Collect every invariant violation in ``crn``; never raises."""
    report = ValidationReport()
    add = report.violations.append
    seen: dict[str, int] = {}
    for i, sp in enumerate(crn.species):
        if sp.id != i:
            add(Violation("species-id", f"species {sp.name!r} has id {sp.id}, expected {i}"))
        if sp.name in seen:
            add(Violation("duplicate-name", f"species name {sp.name!r} used twice"))
        seen[sp.name] = i

    n = len(crn.species)
    for j, r in enumerate(crn.reactions):
        for s, c in r.reactants + r.products:
            if not (isinstance(s, int) and 0 <= s < n):
                add(Violation("unregistered-species", f"species id {s!r} not registered", j))
            if not (isinstance(c, int) and c > 0):
                add(Violation("coefficient", f"coefficient {c!r} must be a positive integer", j))
        if r.order > MAX_REACTANTS:
            add(Violation("reactant-cap", f"{r.order} reactants exceed the cap of {MAX_REACTANTS}", j))
        if r.reversible and sum(c for _, c in r.products) > MAX_REACTANTS:
            add(Violation("reactant-cap", "reverse direction exceeds the reactant cap", j))
        if not _rate_ok(r.forward_rate):
            add(Violation("rate", f"forward rate {r.forward_rate!r} is not positive and finite", j))
        if r.reversible and not _rate_ok(r.reverse_rate):
            add(Violation("rate", f"reverse rate {r.reverse_rate!r} is not positive and finite", j))

    for name in seen:
        m = _DUAL_RAIL.match(name)
        if m:
            partner = f"{m['signal']}_{1 - int(m['rail'])}{m['suffix'] or ''}"
            if partner not in seen:
                add(Violation("dual-rail", f"rail {name!r} has no partner {partner!r}"))
    return report


def dual_rail(signal: str, suffix: str = "") -> tuple[str, str]:
    """Names of the logic-0 and logic-1 rails of ``signal``."""
    return f"{signal}_0{suffix}", f"{signal}_1{suffix}"


# ---------------------------------------------------------------------------
# text format

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_side(text: str, lineno: int, col0: int) -> list[str]:
    if not text.strip():
        return []
    names = []
    col = col0
    for part in text.split("+"):
        name = part.strip()
        if not name or not _NAME.match(name):
            raise CrnSyntaxError(f"bad species term {part.strip()!r}", lineno,
                                 col + len(part) - len(part.lstrip()) + 1)
        names.append(name)
        col += len(part) + 1
    return names


def _parse_rates(fields: list[tuple[int, str]], lineno: int) -> dict[str, float]:
    rates: dict[str, float] = {}
    for col, f in fields:
        key, eq, val = f.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or key not in ("kf", "kr"):
            raise CrnSyntaxError(f"expected kf=<real> or kr=<real>, got {f.strip()!r}", lineno, col)
        if key in rates:
            raise CrnSyntaxError(f"{key} given twice", lineno, col)
        if not _NUMBER.match(val):
            raise CrnSyntaxError(f"bad number {val!r}", lineno, col)
        rates[key] = float(val)
    return rates


def parse_crn(text: str, strict: bool = True) -> Crn:
    """Parse the text format into a :class:`Crn`.

    With ``strict=False`` the semantic checks of :meth:`Crn.add_reaction` are
    skipped so malformed networks can be loaded and passed to
    :func:`validate`.  Syntax errors are always raised.
    """
    crn = Crn()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if line.lstrip().startswith("species:"):
            for name in line.split(":", 1)[1].split():
                if not _NAME.match(name):
                    raise CrnSyntaxError(f"bad species name {name!r}", lineno, raw.find(name) + 1)
                crn.species_named(name, create=True)
            continue

        pieces = line.split(";")
        body = pieces[0]
        fields, col = [], len(body) + 2
        for p in pieces[1:]:
            fields.append((col, p))
            col += len(p) + 1
        if "<->" in body:
            arrow = "<->"
        elif "->" in body:
            arrow = "->"
        else:
            raise CrnSyntaxError("missing '->' or '<->'", lineno, len(body.rstrip()) + 1)
        at = body.index(arrow)
        lhs, rhs = body[:at], body[at + len(arrow):]
        if "->" in rhs or "<-" in rhs:
            raise CrnSyntaxError("more than one arrow", lineno, at + len(arrow) + rhs.index("-") + 1)
        reactants = _parse_side(lhs, lineno, 0)
        products = _parse_side(rhs, lineno, at + len(arrow))
        rates = _parse_rates(fields, lineno)
        if "kf" not in rates:
            raise CrnSyntaxError("missing kf=<real>", lineno, len(line.rstrip()) + 1)
        if arrow == "<->" and "kr" not in rates:
            raise CrnSyntaxError("reversible reaction needs kr=<real>", lineno, len(line.rstrip()) + 1)
        if arrow == "->" and "kr" in rates:
            raise CrnSyntaxError("kr given for an irreversible reaction", lineno, len(line.rstrip()) + 1)

        for name in reactants + products:
            crn.species_named(name, create=True)
        if strict:
            try:
                crn.add_reaction(reactants, products, rates["kf"], rates.get("kr"))
            except CrnError as e:
                raise type(e)(f"line {lineno}: {e}") from None
        else:
            crn.reactions.append(Reaction(crn._terms(reactants), crn._terms(products),
                                          rates["kf"], rates.get("kr")))
    return crn


def serialize_crn(crn: Crn, header: Iterable[str] = ()) -> str:
    """Render ``crn`` in the text format; ``header`` lines become comments."""
    lines = [f"# {h}" if h else "#" for h in header]
    used = {s for r in crn.reactions for s, _ in r.reactants + r.products}
    orphans = [s.name for s in crn.species if s.id not in used]
    if orphans:
        lines.append("species: " + " ".join(orphans))
    lines.extend(crn.format_reaction(r) for r in crn.reactions)
    return "\n".join(lines) + ("\n" if lines else "")
