"""Lingo transformations: forgery checks, authentication, adaptors, recipes.

* ``sharp`` sends the payload through f twice under two distinct parameters
  and ships the pair; a forger who cannot solve for both components at once
  passes the receiver's compliance check with probability 1/|D2|.
* ``authenticating`` appends a keyed code to the payload and scrambles the
  result with a secret involution, so receivers can check who encoded it.
* Data adaptors are section-retract pairs (j, r) with r(j(d)) = d used to
  connect lingos whose spaces do not line up.
* The recipes demonstrate malleability: they convert an observed wire value
  into a different compliant one without knowing the current parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .core import (
    DecodeFailure,
    DefaultFallback,
    Lingo,
    Rng,
    SpaceViolation,
    sample_value,
)
from .rng import SAMPLE_TAG, derive, fnv64, subkey
from .values import (
    BitVec,
    BitVecSpace,
    Nat,
    NatSpace,
    Pair,
    PairSpace,
    ParamPairSpace,
    Space,
    Value,
    space_cardinality,
    space_contains,
    xor_value,
)


class SpaceMismatch(Exception):
    """Adaptor and lingo spaces do not line up."""


class WidthOverflow(Exception):
    """A value does not fit the configured bit width."""


class DegenerateParamSpace(Exception):
    """The parameter space is too small to pick two distinct parameters."""


# ---------------------------------------------------------------------------
# The sharp transform
# ---------------------------------------------------------------------------

def sharp(base: Lingo) -> Lingo:
    """Pair-encode under two distinct parameters; decode via the first.

    The second component pins the payload: a wire pair is compliant only if
    both components encode the same payload, so for each parameter pair some
    wire value has no preimage and the receiver gains a real forgery check.
    """
    if base.ingress_arity != 1 or base.egress_arity != 1:
        raise SpaceViolation("sharp needs a 1/1-arity base lingo")
    d1_card = space_cardinality(base.input_space)
    if d1_card is not None and d1_card < 2:
        raise SpaceViolation("sharp needs an input space with >= 2 values")
    a_card = space_cardinality(base.param_space)
    if a_card is not None and a_card < 2:
        raise DegenerateParamSpace(
            f"{base.name} param space has fewer than 2 elements")
    name = f"sharp({base.name})"

    def f(batch, a):
        [x] = base.f(batch, a.first)
        [y] = base.f(batch, a.second)
        return [Pair(x, y)]

    def g(batch, a):
        return base.g([batch[0].first], a.first)

    def param(n: int, seed: int) -> Value:
        first = base.param(2 * n, seed)
        for bump in range(64):
            second = base.param(2 * n + 1 + bump, seed)
            if second != first:
                return Pair(first, second)
        raise DegenerateParamSpace(
            f"{base.name} param stream kept colliding at index {n}")

    return Lingo(name=name, input_space=base.input_space,
                 output_space=PairSpace(base.output_space, base.output_space),
                 param_space=ParamPairSpace(base.param_space),
                 f=f, g=g, param=param, f_checkable=True)


# ---------------------------------------------------------------------------
# Authenticating transform
# ---------------------------------------------------------------------------

_INVO_TAG = fnv64("involution")
_HASH_TAG = fnv64("auth-hash")


@dataclass(frozen=True)
class AuthParam:
    """Parameter triple of an authenticating lingo: the base parameter, the
    bit-position involution, and the embedded code word."""

    a0: Value
    sigma: tuple[int, ...]
    code_word: int


@dataclass(frozen=True)
class AuthLingo:
    base: Lingo                      # the wrapped lingo (operates on AuthParam)
    inner: Lingo                     # the original lingo the code protects
    oid_universe: tuple[str, ...]
    m: int                           # payload bit-length
    j: int                           # code bit-length
    k: int                           # nonce bit-length
    seed: int                        # enclave secret keying hash and involution

    def hash(self, n: int, pair: tuple[str, str]) -> BitVec:
        """Keyed j-bit code for (nonce, ordered oid pair)."""
        a, b = pair
        if a == b:
            raise ValueError("oid pair must be ordered and distinct")
        if not (0 <= n < (1 << self.k)):
            raise ValueError(f"nonce must be below 2**{self.k}")
        word = derive(self.seed, _HASH_TAG ^ fnv64(a + ">" + b), n)
        return BitVec(self.j, word & ((1 << self.j) - 1))

    def involution(self, n: int) -> tuple[int, ...]:
        """Secret bit-position involution for nonce n."""
        width = self.m + self.j
        perm = [-1] * width
        rng = Rng(subkey(self.seed, _INVO_TAG, n), SAMPLE_TAG)
        for i in range(width):
            if perm[i] != -1:
                continue
            free = [p for p in range(i, width) if perm[p] == -1]
            partner = free[rng.next_below(len(free))]
            perm[i], perm[partner] = partner, i
        return tuple(perm)

    def param2(self, n: int, pair: tuple[str, str]) -> AuthParam:
        return AuthParam(a0=self.inner.param(n, self.seed),
                         sigma=self.involution(n),
                         code_word=self.hash(n, pair).bits)

    def code(self, wire: Value, a: AuthParam) -> BitVec:
        """The last j bits of the un-scrambled wire vector."""
        bits = _apply_involution(_wire_bits(wire, self.m + self.j),
                                 self.m + self.j, a.sigma)
        return BitVec(self.j, bits & ((1 << self.j) - 1))

    def encode(self, d1: Value, n: int, pair: tuple[str, str]) -> BitVec:
        [wire] = self.base.f([d1], self.param2(n, pair))
        return wire

    def decode(self, wire: Value, n: int, pair: tuple[str, str]):
        return self.base.g([wire], self.param2(n, pair))


def _wire_bits(wire: Value, width: int) -> int:
    if isinstance(wire, BitVec):
        bits = wire.bits
    elif isinstance(wire, Nat):
        bits = wire.n
    else:
        raise WidthOverflow(f"wire value {wire!r} is not a bit vector")
    if bits >= (1 << width):
        raise WidthOverflow(f"wire value exceeds {width} bits")
    return bits


def _apply_involution(bits: int, width: int, perm: tuple[int, ...]) -> int:
    # Position 0 is the most significant bit.
    out = 0
    for i in range(width):
        bit = (bits >> (width - 1 - perm[i])) & 1
        out |= bit << (width - 1 - i)
    return out


def _base_out_bits(lingo: Lingo, m: int, w: Value) -> int:
    if isinstance(w, BitVec):
        bits = w.bits
    elif isinstance(w, Nat):
        bits = w.n
    else:
        raise WidthOverflow(f"base output {w!r} has no bit representation")
    if bits >= (1 << m):
        raise WidthOverflow(f"base output exceeds {m} bits")
    return bits


def authenticating(base: Lingo, oids: list[str], m: int, j: int, k: int,
                   seed: int) -> AuthLingo:
    """Wrap ``base`` so each wire value carries a keyed j-bit code.

    Encoding concatenates the m-bit base output with the code for the
    current (nonce, sender, receiver) and scrambles the m+j bit positions
    with a nonce-derived involution.  The code construction is a model of a
    one-way hash, not a cryptographic primitive.
    """
    if base.ingress_arity != 1 or base.egress_arity != 1:
        raise SpaceViolation("authenticating needs a 1/1-arity base lingo")
    if len(set(oids)) < 2:
        raise ValueError("need at least 2 distinct oids")
    if j < 8 or k < 8:
        raise ValueError("code and nonce lengths must be >= 8 bits")
    if isinstance(base.output_space, BitVecSpace) and base.output_space.width > m:
        raise WidthOverflow(
            f"base output width {base.output_space.width} exceeds m={m}")
    width = m + j
    name = f"auth({base.name})"
    out_space = BitVecSpace(width)

    def f(batch, a: AuthParam):
        [w] = base.f(batch, a.a0)
        payload = _base_out_bits(base, m, w)
        concat = (payload << j) | a.code_word
        return [BitVec(width, _apply_involution(concat, width, a.sigma))]

    def g(batch, a: AuthParam):
        bits = _apply_involution(_wire_bits(batch[0], width), width, a.sigma)
        payload = bits >> j
        if isinstance(base.output_space, BitVecSpace):
            mid: Value = BitVec(base.output_space.width, payload)
            if not mid.in_range:
                return DecodeFailure("payload bits outside base output space")
        else:
            mid = Nat(payload)
        return base.g([mid], a.a0)

    # default channel pair for callers that treat the wrapped lingo as a
    # plain Lingo (the law harness); real traffic supplies its own pair
    ordered = sorted(set(oids))[:2]

    def param(n: int, _seed: int) -> AuthParam:
        return auth.param2(n, (ordered[0], ordered[1]))

    wrapped = Lingo(name=name, input_space=base.input_space,
                    output_space=out_space, param_space=None,
                    f=f, g=g, param=param, f_checkable=base.f_checkable)
    auth = AuthLingo(base=wrapped, inner=base, oid_universe=tuple(oids),
                     m=m, j=j, k=k, seed=seed)
    return auth


def verify_auth(auth: AuthLingo, wire_value: Value, n: int,
                pair: tuple[str, str]) -> bool:
    """True iff the wire value carries the code for (n, pair)."""
    a = auth.param2(n, pair)
    try:
        return auth.code(wire_value, a) == auth.hash(n, pair)
    except WidthOverflow:
        return False


# ---------------------------------------------------------------------------
# Data adaptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RetractFailure:
    reason: str = ""


@dataclass(frozen=True)
class DataAdaptor:
    """Section-retract pair (j, r) with r(j(d)) = d.

    ``from_space``/``to_space`` may be None for opaque domains (protocol
    messages); such adapted lingos skip membership checks on that side.
    ``retract_total`` records whether r can fail; ``sparse_image`` marks
    adaptors whose image is a thin subset of ``to_space``.
    """

    name: str
    from_space: Optional[Space]
    to_space: Optional[Space]
    j: Callable[[object], object]
    r: Callable[[object], object]
    retract_total: bool = True
    sparse_image: bool = False


def adapt_pre(ad: DataAdaptor, lingo: Lingo) -> Lingo:
    """Feed adapted payloads in: encode f(j(d)), decode r(g(w))."""
    if ad.to_space != lingo.input_space:
        raise SpaceMismatch(
            f"adaptor {ad.name} lands in {ad.to_space!r}, "
            f"lingo {lingo.name} expects {lingo.input_space!r}")
    name = f"pre({ad.name};{lingo.name})"

    def f(batch, a):
        return lingo.f([ad.j(d) for d in batch], a)

    def g(batch, a):
        out = lingo.g(batch, a)
        if isinstance(out, DecodeFailure):
            return out
        fell_back = isinstance(out, DefaultFallback)
        vals = list(out.values) if fell_back else out
        retracted = []
        for v in vals:
            rv = ad.r(v)
            if isinstance(rv, RetractFailure):
                return DecodeFailure(f"retract failed: {rv.reason}")
            retracted.append(rv)
        return DefaultFallback(tuple(retracted)) if fell_back else retracted

    return Lingo(name=name, input_space=ad.from_space,
                 output_space=lingo.output_space, param_space=lingo.param_space,
                 f=f, g=g, param=lingo.param,
                 ingress_arity=lingo.ingress_arity, egress_arity=lingo.egress_arity,
                 f_checkable=lingo.f_checkable or ad.sparse_image)


def adapt_post(lingo: Lingo, ad: DataAdaptor) -> Lingo:
    """Re-represent wire values: encode j(f(d)), decode g(r(w))."""
    if lingo.output_space != ad.from_space:
        raise SpaceMismatch(
            f"lingo {lingo.name} outputs {lingo.output_space!r}, "
            f"adaptor {ad.name} expects {ad.from_space!r}")
    name = f"post({lingo.name};{ad.name})"

    def f(batch, a):
        return [ad.j(w) for w in lingo.f(batch, a)]

    def g(batch, a):
        retracted = []
        for w in batch:
            rw = ad.r(w)
            if isinstance(rw, RetractFailure):
                return DecodeFailure(f"retract failed: {rw.reason}")
            retracted.append(rw)
        return lingo.g(retracted, a)

    return Lingo(name=name, input_space=lingo.input_space,
                 output_space=ad.to_space, param_space=lingo.param_space,
                 f=f, g=g, param=lingo.param,
                 ingress_arity=lingo.ingress_arity, egress_arity=lingo.egress_arity,
                 f_checkable=lingo.f_checkable or not ad.retract_total)


def identity_adaptor(space: Optional[Space]) -> DataAdaptor:
    ident = lambda v: v
    return DataAdaptor(name="identity", from_space=space, to_space=space,
                       j=ident, r=ident)


def nat_bitvec_adaptor(width: int) -> DataAdaptor:
    """Naturals below 2**width re-represented as width-bit vectors."""

    def j(v: Nat) -> BitVec:
        if v.n >= (1 << width):
            raise WidthOverflow(f"{v.n} does not fit in {width} bits")
        return BitVec(width, v.n)

    def r(v: BitVec) -> Nat:
        return Nat(v.bits)

    return DataAdaptor(name=f"nat_bitvec{width}", from_space=NatSpace(),
                       to_space=BitVecSpace(width), j=j, r=r)


def bitvec_nat_adaptor(width: int) -> DataAdaptor:
    """Width-bit vectors widened into naturals; the retract rejects
    naturals that fall outside the width."""

    def j(v: BitVec) -> Nat:
        return Nat(v.bits)

    def r(v: Nat):
        if v.n >= (1 << width):
            return RetractFailure(f"{v.n} exceeds {width} bits")
        return BitVec(width, v.n)

    return DataAdaptor(name=f"bitvec{width}_nat", from_space=BitVecSpace(width),
                       to_space=NatSpace(), j=j, r=r, retract_total=False)


def sparse_code_adaptor(words: list[str], width: int, seed: int = 0) -> DataAdaptor:
    """Codebook adaptor: word index (as a natural) to a width-bit code drawn
    from a thin, seeded subset of the code space.  The retract rejects
    anything outside the codebook, so most forged wire values fail the
    adapted compliance check."""
    if (1 << width) < 4 * len(words):
        raise WidthOverflow("code space too dense to be called sparse")
    tag = fnv64("sparse-codebook")
    codes: list[int] = []
    seen: dict[int, int] = {}
    idx = 0
    while len(codes) < len(words):
        c = derive(seed, tag, idx) & ((1 << width) - 1)
        idx += 1
        if c in seen:
            continue
        seen[c] = len(codes)
        codes.append(c)

    def j(v: Nat) -> BitVec:
        return BitVec(width, codes[v.n])

    def r(v: BitVec):
        if v.bits not in seen:
            return RetractFailure("not a codebook entry")
        return Nat(seen[v.bits])

    return DataAdaptor(name=f"sparse{width}", from_space=None,
                       to_space=BitVecSpace(width), j=j, r=r,
                       retract_total=False, sparse_image=True)


# ---------------------------------------------------------------------------
# Malleability recipes
# ---------------------------------------------------------------------------

def _xor_nonzero(y: Value) -> Value:
    """The mask repair map: substitute a fixed nonzero value for zero."""
    if isinstance(y, BitVec):
        return BitVec(y.width, (1 << y.width) - 1) if y.bits == 0 else y
    if isinstance(y, Nat):
        return Nat(1) if y.n == 0 else y
    raise SpaceViolation(f"xor recipe needs bitvec or nat masks, got {y!r}")


def xor_recipe(observed: Value, a_prime: Value) -> Value:
    """Malleate an xor-encoded wire value: xor in a guaranteed-nonzero mask.
    The result differs from the observed value and stays compliant with the
    victim's current parameter."""
    return xor_value(observed, _xor_nonzero(a_prime))


def xor_sharp_recipe(observed: Pair, a_prime_pair: Pair) -> Pair:
    """Malleate a sharp-xor wire pair: xor the same nonzero mask into both
    components, which preserves the pair's internal consistency."""
    first = a_prime_pair.first
    if not isinstance(first, BitVec) or first.width < 2:
        raise SpaceViolation("sharp xor recipe needs bitvec masks of width >= 2")
    n = first.width
    ones = BitVec(n, (1 << n) - 1)
    if first.bits != 0:
        mask = first
    elif a_prime_pair.second != ones:
        mask = ones
    else:
        mask = BitVec(n, (1 << (n - 1)) - 1)  # 0 followed by n-1 ones
    return Pair(xor_value(observed.first, mask), xor_value(observed.second, mask))


@dataclass(frozen=True)
class Recipe:
    """A checked malleation recipe t(x, y) = f(x, r(y)) for lingos whose f
    feeds back into the payload space and commutes with itself."""

    lingo: Lingo
    a0_set: tuple[Value, ...]

    def repair(self, a_prime: Value) -> Value:
        return a_prime if a_prime in self.a0_set else self.a0_set[0]

    def forge(self, observed: Value, a_prime: Value) -> Value:
        return self.lingo.f([observed], self.repair(a_prime))[0]


@dataclass(frozen=True)
class NotApplicable:
    failed_hypothesis: str
    detail: str = ""


def generic_recipe(lingo: Lingo, a0_sample: list[Value], seed: int = 0,
                   samples: int = 500) -> Union[Recipe, NotApplicable]:
    """Probabilistically check the generic-malleability hypotheses and build
    the recipe when they hold.

    (i) f(d, a) lands back in the payload space, (ii) every sampled mask in
    a0_sample actually moves the payload, (iii) applying f twice commutes in
    the two parameters.  Checks run on seeded samples, so NotApplicable is
    conservative rather than a proof.
    """
    distinct = []
    for a in a0_sample:
        if a not in distinct:
            distinct.append(a)
    if len(distinct) < 2:
        return NotApplicable("a0_sample", "need at least 2 distinct elements")
    for a in distinct:
        if not space_contains(lingo.param_space, a):
            return NotApplicable("a0_sample", f"{a!r} outside param space")
    if lingo.ingress_arity != 1 or lingo.egress_arity != 1:
        return NotApplicable("arity", "recipe construction needs 1/1 arities")

    rng = Rng(subkey(seed, fnv64("generic-recipe"), 0), SAMPLE_TAG)
    for i in range(samples):
        d = sample_value(lingo.input_space, rng)
        a = sample_value(lingo.param_space, rng)
        ap = sample_value(lingo.param_space, rng)
        [fd] = lingo.f([d], a)
        if not space_contains(lingo.input_space, fd):
            return NotApplicable(
                "closure", f"f({d!r}, {a!r}) left the payload space")
        a2 = distinct[i % len(distinct)]
        if lingo.f([d], a2)[0] == d:
            return NotApplicable(
                "movement", f"f fixed {d!r} under mask {a2!r}")
        if lingo.f([fd], ap) != lingo.f([lingo.f([d], ap)[0]], a):
            return NotApplicable(
                "commutation", f"f does not commute at {d!r}")
    return Recipe(lingo=lingo, a0_set=tuple(distinct))
