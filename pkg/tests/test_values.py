import pytest
from hypothesis import given, strategies as st

from dialectica.values import (
    AtomSet,
    AtomSetSpace,
    BitVec,
    BitVecSpace,
    Nat,
    NatSpace,
    Overflow,
    Pair,
    PairSpace,
    ParamPairSpace,
    ShapeMismatch,
    Tagged,
    TaggedSpace,
    bytes_to_nat,
    nat_to_bytes,
    space_cardinality,
    space_contains,
    space_enumerate,
    space_from_json,
    space_to_json,
    value_from_json,
    value_to_json,
    xor_value,
    zero_like,
)


class TestSpaceContains:
    def test_bitvec_boundary(self):
        assert space_contains(BitVecSpace(8), BitVec(8, 255))

    def test_overwidth_bits_rejected(self):
        # the value is representable, the space gate is strict
        assert not space_contains(BitVecSpace(8), BitVec(8, 1000))

    def test_width_mismatch_rejected(self):
        assert not space_contains(BitVecSpace(8), BitVec(16, 3))

    def test_parampair_diagonal_excluded(self):
        sp = ParamPairSpace(BitVecSpace(4))
        assert not space_contains(sp, Pair(BitVec(4, 5), BitVec(4, 5)))
        assert space_contains(sp, Pair(BitVec(4, 5), BitVec(4, 6)))

    def test_atomset_subset_of_universe(self):
        sp = AtomSetSpace(("a", "b", "c"))
        assert space_contains(sp, AtomSet(("a", "c")))
        assert not space_contains(sp, AtomSet(("a", "z")))

    def test_tagged(self):
        sp = TaggedSpace((NatSpace(), BitVecSpace(4)))
        assert space_contains(sp, Tagged(1, Nat(7)))
        assert space_contains(sp, Tagged(2, BitVec(4, 7)))
        assert not space_contains(sp, Tagged(2, Nat(7)))
        assert not space_contains(sp, Tagged(3, Nat(7)))

    def test_total_on_wrong_shapes(self):
        assert not space_contains(NatSpace(), BitVec(8, 1))
        assert not space_contains(PairSpace(NatSpace(), NatSpace()), Nat(1))


class TestXor:
    def test_byte_example(self):
        assert xor_value(BitVec(8, 3), BitVec(8, 5)) == BitVec(8, 6)

    def test_atomset_example(self):
        got = xor_value(AtomSet(("a", "b", "c", "d")), AtomSet(("c", "d", "e", "f")))
        assert got == AtomSet(("a", "b", "e", "f"))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            xor_value(Nat(1), BitVec(8, 1))
        with pytest.raises(ShapeMismatch):
            xor_value(BitVec(8, 1), BitVec(4, 1))

    @given(st.integers(0, 2**64), st.integers(0, 2**64))
    def test_nat_involution(self, a, b):
        x, y = Nat(a), Nat(b)
        assert xor_value(xor_value(x, y), y) == x

    @given(st.integers(0, 255), st.integers(0, 255))
    def test_bitvec_involution_and_closure(self, a, b):
        x, y = BitVec(8, a), BitVec(8, b)
        out = xor_value(x, y)
        assert space_contains(BitVecSpace(8), out)
        assert xor_value(out, y) == x

    @given(st.lists(st.sampled_from("abcdef")), st.lists(st.sampled_from("abcdef")))
    def test_atomset_involution(self, a, b):
        x, y = AtomSet(tuple(a)), AtomSet(tuple(b))
        assert xor_value(xor_value(x, y), y) == x

    @given(st.lists(st.sampled_from("abcdef"), min_size=0, max_size=6))
    def test_self_inverse_is_zero(self, atoms):
        v = AtomSet(tuple(atoms))
        assert xor_value(v, v) == zero_like(v)
        n = Nat(sum(ord(c) for c in atoms))
        assert xor_value(n, n) == zero_like(n)

    def test_atomset_canonical_form(self):
        # any permutation of the same members collapses to one representation
        assert AtomSet(("b", "a", "b")) == AtomSet(("a", "b"))


class TestByteCodec:
    def test_positional(self):
        assert bytes_to_nat(bytes([0x01, 0x00])) == Nat(256)

    def test_zero_padding(self):
        assert nat_to_bytes(Nat(0), 2) == b"\x00\x00"

    def test_overflow(self):
        with pytest.raises(Overflow):
            nat_to_bytes(Nat(256**2), 2)

    @given(st.binary(min_size=0, max_size=32))
    def test_round_trip(self, data):
        n = bytes_to_nat(data)
        assert nat_to_bytes(n, len(data)) == data


VALUES = [
    Nat(0),
    Nat(12345678901234567890),
    BitVec(8, 6),
    Pair(Nat(1), BitVec(4, 2)),
    AtomSet(("a", "b")),
    Tagged(1, Nat(3)),
    Tagged(2, Pair(AtomSet(()), Nat(9))),
]

SPACES = [
    NatSpace(),
    BitVecSpace(8),
    PairSpace(NatSpace(), BitVecSpace(4)),
    AtomSetSpace(("a", "b")),
    TaggedSpace((NatSpace(), BitVecSpace(4))),
    ParamPairSpace(BitVecSpace(4)),
]


@pytest.mark.parametrize("v", VALUES)
def test_value_json_round_trip(v):
    assert value_from_json(value_to_json(v)) == v


def test_value_json_shorthand():
    assert value_from_json(13) == Nat(13)
    assert value_from_json({"nat": "256"}) == Nat(256)
    assert value_from_json({"bv": {"w": 8, "n": 6}}) == BitVec(8, 6)


@pytest.mark.parametrize("s", SPACES)
def test_space_json_round_trip(s):
    assert space_from_json(space_to_json(s)) == s


def test_cardinality_and_enumeration():
    assert space_cardinality(BitVecSpace(4)) == 16
    assert space_cardinality(NatSpace()) is None
    assert space_cardinality(ParamPairSpace(BitVecSpace(2))) == 12
    vals = space_enumerate(ParamPairSpace(BitVecSpace(2)))
    assert len(vals) == 12
    assert all(space_contains(ParamPairSpace(BitVecSpace(2)), v) for v in vals)
    assert space_enumerate(NatSpace()) is None
    tagged = space_enumerate(TaggedSpace((BitVecSpace(1), BitVecSpace(2))))
    assert len(tagged) == 6
