"""The lingo abstraction: parametric invertible payload transformations.

A lingo carries an encode function ``f``, its one-sided inverse ``g``
(``g(f(d, a), a) == d`` for every payload d and parameter a), and a
``param`` function deriving the parameter for message number n from a
shared seed.  ``f`` and ``g`` work on batches so a single logical payload
may fan out into several wire values (egress arity > 1).

Besides the data type this module provides the checked entry points
(``apply_f``/``apply_g``), the compliance test used by dialects to reject
forgeries, and a law-testing harness that exercises the defining equation
and its consequences on seeded samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .rng import Rng, SAMPLE_TAG, derive, fnv64, subkey
from .values import (
    AtomSet,
    AtomSetSpace,
    BitVec,
    BitVecSpace,
    Nat,
    NatSpace,
    Pair,
    PairSpace,
    ParamPairSpace,
    ShapeMismatch,
    Space,
    Tagged,
    TaggedSpace,
    Value,
    space_cardinality,
    space_contains,
    space_enumerate,
    value_to_json,
)


class SpaceViolation(Exception):
    """A value fell outside the space a lingo operation requires."""


class UnsampleableSpace(Exception):
    """No sample generator exists for the requested space."""


@dataclass(frozen=True)
class DecodeFailure:
    """First-class decode rejection; flows into dialect-level rejection
    instead of raising."""

    reason: str = ""


@dataclass(frozen=True)
class DefaultFallback:
    """Decode that fell back to a branch default value (horizontal
    composition with a mismatched tag).  Carries the decoy plaintext so the
    caller can still inspect it, but dialects treat it as a rejection."""

    values: tuple[Value, ...]


Batch = list
GResult = Union[list, DecodeFailure, DefaultFallback]


@dataclass(frozen=True)
class Lingo:
    """A closed transformation object (input, output, parameter spaces plus
    f, g, param and the ingress/egress arities).

    ``param_space`` may be None for constructions whose parameters are not
    plain values (the authenticating transform); such lingos are sampled
    through their ``param`` function instead.
    """

    name: str
    input_space: Optional[Space]
    output_space: Optional[Space]
    param_space: Optional[Space]
    f: Callable[[Batch, Value], Batch]
    g: Callable[[Batch, Value], GResult]
    param: Callable[[int, int], Value]
    ingress_arity: int = 1
    egress_arity: int = 1
    f_checkable: bool = False

    def __repr__(self) -> str:  # keep trace output short
        return f"Lingo({self.name})"


def apply_f(lingo: Lingo, d1_batch: Batch, a: Value) -> Batch:
    """Checked encode: validates arity and space membership, then runs f."""
    if len(d1_batch) != lingo.ingress_arity:
        raise SpaceViolation(
            f"{lingo.name}: expected {lingo.ingress_arity} inputs, got {len(d1_batch)}")
    for d in d1_batch:
        if not space_contains(lingo.input_space, d):
            raise SpaceViolation(f"{lingo.name}: {d!r} not in input space")
    if lingo.param_space is not None and not space_contains(lingo.param_space, a):
        raise SpaceViolation(f"{lingo.name}: parameter {a!r} not in param space")
    out = lingo.f(list(d1_batch), a)
    if len(out) != lingo.egress_arity:
        raise SpaceViolation(
            f"{lingo.name}: f produced {len(out)} values, expected {lingo.egress_arity}")
    return out


def apply_g(lingo: Lingo, d2_batch: Batch, a: Value) -> GResult:
    """Checked decode.  DecodeFailure/DefaultFallback are returned, not raised."""
    if len(d2_batch) != lingo.egress_arity:
        raise SpaceViolation(
            f"{lingo.name}: expected {lingo.egress_arity} wire values, got {len(d2_batch)}")
    if lingo.param_space is not None and not space_contains(lingo.param_space, a):
        raise SpaceViolation(f"{lingo.name}: parameter {a!r} not in param space")
    return lingo.g(list(d2_batch), a)


def is_compliant(lingo: Lingo, d2_batch: Batch, a: Value) -> bool:
    """True iff the wire batch has a preimage under f(., a): the decode
    succeeds and re-encoding reproduces the batch exactly.

    Total over arbitrary wire values: forged garbage of the wrong shape is
    simply non-compliant."""
    if lingo.param_space is not None and not space_contains(lingo.param_space, a):
        raise SpaceViolation(f"{lingo.name}: parameter {a!r} not in param space")
    if len(d2_batch) != lingo.egress_arity:
        return False
    try:
        decoded = lingo.g(list(d2_batch), a)
    except (AttributeError, TypeError, ValueError, ShapeMismatch):
        return False
    if isinstance(decoded, DecodeFailure):
        return False
    if isinstance(decoded, DefaultFallback):
        decoded = list(decoded.values)
    if len(decoded) != lingo.ingress_arity:
        return False
    for d in decoded:
        if not space_contains(lingo.input_space, d):
            return False
    try:
        return lingo.f(list(decoded), a) == list(d2_batch)
    except (SpaceViolation, ValueError):
        return False


# ---------------------------------------------------------------------------
# Sampling and parameter projection
# ---------------------------------------------------------------------------

def sample_value(space: Optional[Space], rng: Rng, nat_ceiling: int = 1 << 32) -> Value:
    """Draw a value of ``space`` from a derive stream.

    Naturals are drawn below ``nat_ceiling`` (the space itself is unbounded;
    the ceiling only bounds the generator).
    """
    if space is None:
        raise UnsampleableSpace("opaque space has no generator")
    if isinstance(space, NatSpace):
        return Nat(rng.next_below(nat_ceiling))
    if isinstance(space, BitVecSpace):
        bits = 0
        for _ in range((space.width + 63) // 64):
            bits = (bits << 64) | rng.next_u64()
        return BitVec(space.width, bits & ((1 << space.width) - 1))
    if isinstance(space, PairSpace):
        left = sample_value(space.left, rng, nat_ceiling)
        return Pair(left, sample_value(space.right, rng, nat_ceiling))
    if isinstance(space, AtomSetSpace):
        atoms = sorted(space.universe)
        picked = []
        word, have = 0, 0
        for a in atoms:
            if have == 0:
                word, have = rng.next_u64(), 64
            if word & 1:
                picked.append(a)
            word >>= 1
            have -= 1
        return AtomSet(tuple(picked))
    if isinstance(space, TaggedSpace):
        branch = rng.next_below(len(space.branches)) + 1
        return Tagged(branch, sample_value(space.branches[branch - 1], rng, nat_ceiling))
    if isinstance(space, ParamPairSpace):
        if space_cardinality(space.base) == 1:
            raise UnsampleableSpace("base space has a single element")
        first = sample_value(space.base, rng, nat_ceiling)
        for _ in range(64):
            second = sample_value(space.base, rng, nat_ceiling)
            if second != first:
                return Pair(first, second)
        raise UnsampleableSpace(f"could not draw distinct pair from {space.base!r}")
    raise UnsampleableSpace(f"no generator for {space!r}")


def project_param(space: Space, seed: int, stream_tag: int, index: int,
                  nat_ceiling: int = 1 << 32) -> Value:
    """Reduce the keyed stream at (seed, stream_tag, index) into ``space``.

    Single-word spaces consume derive(seed, tag, index) directly; composite
    spaces expand it into a nested stream so the projection stays bit-exact
    across platforms.
    """
    if isinstance(space, NatSpace):
        return Nat(derive(seed, stream_tag, index) % nat_ceiling)
    if isinstance(space, BitVecSpace) and space.width <= 64:
        return BitVec(space.width,
                      derive(seed, stream_tag, index) & ((1 << space.width) - 1))
    rng = Rng(subkey(seed, stream_tag, index), SAMPLE_TAG)
    return sample_value(space, rng, nat_ceiling)


def make_param(space: Space, name: str, nat_ceiling: int = 1 << 32
               ) -> Callable[[int, int], Value]:
    """Standard param function: a per-lingo stream keyed by the lingo name."""
    tag = fnv64(name)

    def param(n: int, seed: int) -> Value:
        return project_param(space, seed, tag, n, nat_ceiling)

    return param


def sample_param(lingo: Lingo, n: int, seed: int) -> Value:
    """Parameter sample for law checking: prefer the space generator, fall
    back to the lingo's own param stream for opaque parameter spaces."""
    if lingo.param_space is None:
        return lingo.param(n, seed)
    rng = Rng(subkey(seed, fnv64(lingo.name + "/laws"), n), SAMPLE_TAG)
    return sample_value(lingo.param_space, rng)


# ---------------------------------------------------------------------------
# Law harness
# ---------------------------------------------------------------------------

@dataclass
class LawResult:
    law: str
    passed: bool
    counterexample: Optional[dict] = None

    def to_json(self) -> dict:
        out = {"law": self.law, "passed": self.passed}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class LawReport:
    lingo: str
    results: list[LawResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> dict:
        return {"lingo": self.lingo, "passed": self.all_passed,
                "laws": [r.to_json() for r in self.results]}


def _ce(inputs: dict, expected, got) -> dict:
    def enc(x):
        if isinstance(x, list):
            return [enc(v) for v in x]
        if isinstance(x, (Nat, BitVec, Pair, AtomSet, Tagged)):
            return value_to_json(x)
        return repr(x)

    return {"inputs": {k: enc(v) for k, v in inputs.items()},
            "expected": enc(expected), "got": enc(got)}


def check_lingo_laws(lingo: Lingo, sample_count: int, rng: Rng) -> LawReport:
    """Exercise the defining laws on seeded samples.

    L0: g(f(d, a), a) == d.
    L1: f(., a) is injective on sampled distinct payload pairs.
    C1: wire values of the form f(d, a) re-encode to themselves after decode.
    C3: on small finite spaces, compliance coincides exactly with membership
        in the image of f(., a), checked exhaustively.
    """
    report = LawReport(lingo=lingo.name)
    seed = rng.next_u64()

    def draw_batch(n: int) -> Batch:
        r = Rng(subkey(seed, SAMPLE_TAG, n), SAMPLE_TAG)
        return [sample_value(lingo.input_space, r) for _ in range(lingo.ingress_arity)]

    # L0: round trip
    failure = None
    for i in range(sample_count):
        d1, a = draw_batch(2 * i), sample_param(lingo, i, seed)
        back = apply_g(lingo, apply_f(lingo, d1, a), a)
        if isinstance(back, (DecodeFailure, DefaultFallback)) or back != d1:
            failure = LawResult("L0_left_inverse", False,
                                _ce({"d1": d1, "a": a}, d1, back))
            break
    report.results.append(failure or LawResult("L0_left_inverse", True))

    # Output membership rides along with L0 sampling
    failure = None
    for i in range(min(sample_count, 200)):
        d1, a = draw_batch(2 * i), sample_param(lingo, i, seed)
        for w in apply_f(lingo, d1, a):
            if not space_contains(lingo.output_space, w):
                failure = LawResult("f_lands_in_output_space", False,
                                    _ce({"d1": d1, "a": a}, "member", w))
                break
        if failure:
            break
    report.results.append(failure or LawResult("f_lands_in_output_space", True))

    # L1: injectivity on sampled collision pairs
    failure = None
    for i in range(sample_count):
        d1, d1p = draw_batch(2 * i), draw_batch(2 * i + 1)
        if d1 == d1p:
            continue
        a = sample_param(lingo, i, seed)
        if apply_f(lingo, d1, a) == apply_f(lingo, d1p, a):
            failure = LawResult("L1_injectivity", False,
                                _ce({"d1": d1, "d1'": d1p, "a": a},
                                    "distinct images", "equal images"))
            break
    report.results.append(failure or LawResult("L1_injectivity", True))

    # C1: image values re-encode after decode
    failure = None
    for i in range(sample_count):
        d1, a = draw_batch(2 * i), sample_param(lingo, i, seed)
        d2 = apply_f(lingo, d1, a)
        if not is_compliant(lingo, d2, a):
            failure = LawResult("C1_image_compliant", False,
                                _ce({"d1": d1, "a": a}, "compliant", d2))
            break
    report.results.append(failure or LawResult("C1_image_compliant", True))

    # C3: exhaustive compliance/preimage equivalence on small spaces
    c3 = _check_c3(lingo, seed)
    if c3 is not None:
        report.results.append(c3)
    return report


def _check_c3(lingo: Lingo, seed: int, d1_limit: int = 4096) -> Optional[LawResult]:
    if lingo.input_space is None or lingo.output_space is None:
        return None
    d1_card = space_cardinality(lingo.input_space)
    if d1_card is None or d1_card > d1_limit or lingo.ingress_arity != 1:
        return None
    d1s = space_enumerate(lingo.input_space, d1_limit)
    d2s = space_enumerate(lingo.output_space, 256) if lingo.egress_arity == 1 else None
    for i in range(4):
        a = sample_param(lingo, i, seed)
        image = set()
        for d1 in d1s:
            image.add(tuple(apply_f(lingo, [d1], a)))
        if d2s is not None:
            candidates = [(w,) for w in d2s]
        else:
            r = Rng(subkey(seed, SAMPLE_TAG, 1000 + i), SAMPLE_TAG)
            candidates = list(image)
            for _ in range(64):
                candidates.append(tuple(
                    sample_value(lingo.output_space, r)
                    for _ in range(lingo.egress_arity)))
        for cand in candidates:
            has_preimage = cand in image
            if is_compliant(lingo, list(cand), a) != has_preimage:
                return LawResult("C3_compliance_equivalence", False,
                                 _ce({"d2": list(cand), "a": a},
                                     has_preimage, not has_preimage))
    return LawResult("C3_compliance_equivalence", True)


def find_noncompliant_witness(lingo: Lingo, a: Value, rng: Rng,
                              attempts: int = 4096) -> Optional[Batch]:
    """Search for a wire batch with no preimage under f(., a).

    Exhaustive when the output space is small, seeded random otherwise;
    None means no witness was found within the budget (the lingo looks
    symmetric for this parameter).
    """
    if lingo.output_space is not None and lingo.egress_arity == 1:
        enumerated = space_enumerate(lingo.output_space, min(attempts, 4096))
        if enumerated is not None:
            for w in enumerated:
                if not is_compliant(lingo, [w], a):
                    return [w]
            return None
    for _ in range(attempts):
        batch = [sample_value(lingo.output_space, rng)
                 for _ in range(lingo.egress_arity)]
        if not is_compliant(lingo, batch, a):
            return batch
    return None
