import pytest

from dialectica.core import Rng, UnsampleableSpace, apply_f, check_lingo_laws
from dialectica.mqtt import mqtt_codec_adaptor
from dialectica.specs import SpecError, build_adaptor, build_lingo
from dialectica.transforms import adapt_pre
from dialectica.values import BitVec, BitVecSpace, Nat, NatSpace, PairSpace


class TestLingoSpecs:
    def test_leaf_kinds(self):
        assert build_lingo({"kind": "xor_bitvec", "width": 8}).name == "xor_bitvec8"
        assert build_lingo({"kind": "xor_nat"}).input_space == NatSpace()
        assert build_lingo({"kind": "xor_set",
                            "universe": ["a", "b"]}).name == "xor_set"
        assert build_lingo({"kind": "divide_check"}).f_checkable
        assert build_lingo({"kind": "identity",
                            "space": {"bitvec": 4}}).input_space == BitVecSpace(4)
        split = build_lingo({"kind": "split_bitvec", "half_width": 4})
        assert split.egress_arity == 2

    def test_operator_nodes(self):
        sx = build_lingo({"sharp": {"kind": "xor_bitvec", "width": 4}})
        assert sx.f_checkable
        prod = build_lingo({"product": [{"kind": "xor_bitvec", "width": 4},
                                        {"kind": "divide_check"}]})
        assert prod.input_space == PairSpace(BitVecSpace(4), NatSpace())
        tup = build_lingo({"tupling": [{"kind": "xor_bitvec", "width": 4},
                                       {"kind": "xor_bitvec", "width": 4}]})
        assert tup.output_space == PairSpace(BitVecSpace(4), BitVecSpace(4))

    def test_adapt_nodes(self):
        pre = build_lingo({"adapt_pre": {
            "adaptor": {"kind": "nat_bitvec", "width": 16},
            "lingo": {"kind": "xor_bitvec", "width": 16}}})
        assert pre.input_space == NatSpace()
        assert apply_f(pre, [Nat(3)], BitVec(16, 5)) == [BitVec(16, 6)]
        post = build_lingo({"adapt_post": {
            "lingo": {"kind": "xor_bitvec", "width": 16},
            "adaptor": {"kind": "bitvec_nat", "width": 16}}})
        assert post.output_space == NatSpace()
        report = check_lingo_laws(post, 200, Rng(1, 1))
        assert report.all_passed

    def test_auth_node(self):
        auth = build_lingo({"auth": {"base": {"kind": "xor_bitvec", "width": 16},
                                     "oids": ["a", "b"], "m": 16, "j": 16,
                                     "k": 32, "seed": 4}})
        report = check_lingo_laws(auth, 150, Rng(2, 2))
        assert report.all_passed

    @pytest.mark.parametrize("bad", [
        {"kind": "warp_drive"},
        {"sharp": {"kind": "xor_bitvec"}},
        {"functional": [{"kind": "xor_nat"}]},
        {"horizontal": {"branches": [{"kind": "xor_nat"}]}},
        {"product": "nope"},
        {},
        [],
        # space incompatibilities must surface as spec errors, not crashes
        {"functional": [{"kind": "xor_bitvec", "width": 8},
                        {"kind": "divide_check"}]},
        {"tupling": [{"kind": "xor_bitvec", "width": 8}, {"kind": "xor_nat"}]},
        {"horizontal": {"branches": [{"kind": "xor_nat"},
                                     {"kind": "divide_check"}],
                        "defaults": [{"nat": "0"}, {"nat": "0"}],
                        "bias": [1, 1]}},
        {"horizontal": {"branches": [{"kind": "xor_nat"},
                                     {"kind": "divide_check"}],
                        "defaults": [{"nat": "0"},
                                     {"pair": [{"nat": "0"}, {"nat": "0"}]}],
                        "bias": [1, 0]}},
    ])
    def test_bad_specs_rejected(self, bad):
        with pytest.raises(SpecError):
            build_lingo(bad)

    def test_bad_adaptor_rejected(self):
        with pytest.raises(SpecError):
            build_adaptor({"kind": "teleport"})


def test_law_harness_needs_a_generator():
    lingo = adapt_pre(mqtt_codec_adaptor(), build_lingo({"kind": "xor_nat"}))
    with pytest.raises(UnsampleableSpace):
        check_lingo_laws(lingo, 10, Rng(0, 0))
