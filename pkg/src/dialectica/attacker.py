"""On-path attacker: observation, knowledge reveals, forgery strategies.

The attacker reads every wire message (appending to a captured-message
registry) and may append its own messages to channels, but never removes,
reorders, or modifies honest traffic.  Knowledge grows through probability
rules over message age, lingo reuse, and parameter reuse; revealed messages
move into a cleartext registry that strategies may consult.

Strategies see only public record fields; the ground-truth ``hidden``
context is reserved for the reveal engine and is not reachable through the
strategy-facing view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Optional, Union

from .core import (
    DecodeFailure,
    DefaultFallback,
    Lingo,
    Rng,
    apply_f,
    apply_g,
    is_compliant,
    sample_value,
)
from .net import HiddenCtx, Message
from .rng import ATTACKER_TAG, fnv64, subkey
from .transforms import xor_recipe, xor_sharp_recipe
from .values import (
    BitVec,
    Nat,
    NatSpace,
    Pair,
    Tagged,
    TaggedSpace,
    Value,
    xor_value,
)

STRATEGIES = ("passive", "replay", "xor_recipe", "xor_sharp_recipe",
              "dc_zero_remainder", "random_wire", "param_reuse_oracle")


@dataclass
class CapturedRecord:
    src: str
    dst: str
    wire: object
    t: int
    hidden: HiddenCtx
    revealed: bool = False

    def public_view(self) -> "PublicRecord":
        return PublicRecord(src=self.src, dst=self.dst, wire=self.wire, t=self.t)


@dataclass(frozen=True)
class PublicRecord:
    """What a strategy is allowed to see of a captured message."""

    src: str
    dst: str
    wire: object
    t: int


@dataclass(frozen=True)
class ClearRecord:
    src: str
    dst: str
    wire: object
    t: int
    clear: object
    dialect_info: Optional[str]
    lingo_info: Optional[str]
    params: Optional[object]


@dataclass(frozen=True)
class AdvantageConfig:
    """Step functions over thresholds: evaluation at x returns the
    probability of the greatest threshold <= x, default 0."""

    t_max: tuple[tuple[int, float], ...] = ()
    w_max: tuple[tuple[int, float], ...] = ()
    s_max: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        for name in ("t_max", "w_max", "s_max"):
            steps = getattr(self, name)
            thresholds = [t for t, _ in steps]
            if thresholds != sorted(set(thresholds)):
                raise ValueError(f"{name} thresholds must be strictly increasing")
            if any(not 0.0 <= p <= 1.0 for _, p in steps):
                raise ValueError(f"{name} probabilities must lie in [0, 1]")

    @staticmethod
    def zero() -> "AdvantageConfig":
        return AdvantageConfig()

    @staticmethod
    def from_json(obj: dict) -> "AdvantageConfig":
        def steps(key):
            return tuple((int(t), float(p)) for t, p in obj.get(key, []))

        return AdvantageConfig(t_max=steps("t_max"), w_max=steps("w_max"),
                               s_max=steps("s_max"))


def eval_step(steps: tuple[tuple[int, float], ...], x: int) -> float:
    prob = 0.0
    for threshold, p in steps:
        if x >= threshold:
            prob = p
    return prob


@dataclass
class AttackerState:
    records: list[CapturedRecord] = field(default_factory=list)
    clear: list[ClearRecord] = field(default_factory=list)
    advantage: AdvantageConfig = field(default_factory=AdvantageConfig.zero)
    strategies: tuple[str, ...] = ()
    max_injections: int = 0
    injection_rate: float = 1.0
    injected: int = 0
    rng: Optional[Rng] = None

    @property
    def budget_left(self) -> int:
        return self.max_injections - self.injected


def observe(state: AttackerState, msg: Message, t: int,
            hidden: HiddenCtx) -> AttackerState:
    """Record a cloned wire message; channels are never touched."""
    state.records.append(CapturedRecord(src=msg.src, dst=msg.dst,
                                        wire=msg.payload, t=t, hidden=hidden))
    return state


def reveal_sweep(state: AttackerState, now: int, rng: Rng) -> AttackerState:
    """Try to reveal every captured message with the additive probability
    min(p_age + p_weak + p_strong + p_cleartext, 1)."""
    lingo_counts: dict[str, int] = {}
    pair_counts: dict[tuple, int] = {}
    for rec in state.records:
        name = rec.hidden.lingo_name
        if name is not None:
            lingo_counts[name] = lingo_counts.get(name, 0) + 1
            key = (name, repr(rec.hidden.param))
            pair_counts[key] = pair_counts.get(key, 0) + 1

    for rec in state.records:
        if rec.revealed:
            continue
        name = rec.hidden.lingo_name
        p_age = eval_step(state.advantage.t_max, now - rec.t)
        p_weak = eval_step(state.advantage.w_max,
                           lingo_counts.get(name, 0)) if name else 0.0
        p_strong = eval_step(state.advantage.s_max,
                             pair_counts.get((name, repr(rec.hidden.param)), 0)
                             ) if name else 0.0
        p_clear = 0.0 if rec.hidden.dialected else 1.0
        p = min(p_age + p_weak + p_strong + p_clear, 1.0)
        if p <= 0.0:
            continue
        if rng.next_float() <= p:
            rec.revealed = True
            if rec.hidden.dialected:
                state.clear.append(ClearRecord(
                    src=rec.src, dst=rec.dst, wire=rec.wire, t=rec.t,
                    clear=rec.hidden.plaintext, dialect_info="static",
                    lingo_info=rec.hidden.lingo_name, params=rec.hidden.param))
            else:
                state.clear.append(ClearRecord(
                    src=rec.src, dst=rec.dst, wire=rec.wire, t=rec.t,
                    clear=rec.hidden.plaintext, dialect_info=None,
                    lingo_info=None, params=None))
    return state


@dataclass(frozen=True)
class NoAttempt:
    reason: str = ""


def _latest_capture(state: AttackerState, src: str, dst: str
                    ) -> Optional[PublicRecord]:
    for rec in reversed(state.records):
        if rec.src == src and rec.dst == dst:
            return rec.public_view()
    return None


def _mask_for(wire_space, rng: Rng) -> Value:
    space = wire_space if wire_space is not None else NatSpace()
    return sample_value(space, rng)


def strategy_ready(state: AttackerState, strategy: str, src: str, dst: str,
                   wire_space) -> bool:
    if strategy == "passive":
        return False
    if strategy in ("replay", "xor_recipe", "xor_sharp_recipe"):
        return _latest_capture(state, src, dst) is not None
    if strategy == "param_reuse_oracle":
        return any(c.params is not None and c.src == src and c.dst == dst
                   for c in state.clear)
    if strategy in ("dc_zero_remainder", "random_wire"):
        return True
    return False


def craft_forgery(state: AttackerState, strategy: str, src: str, dst: str,
                  rng: Rng, wire_space=None, lingo: Optional[Lingo] = None
                  ) -> Union[tuple[object, Optional[object]], NoAttempt]:
    """Produce (payload, intended_plaintext) for a strategy, or NoAttempt.

    ``intended_plaintext`` is what the attacker means the receiver to
    decode; None when the strategy only aims to pass the forgery check.
    Only public record fields and revealed cleartext are consulted.
    """
    if strategy == "passive":
        return NoAttempt("passive strategy never injects")

    if strategy == "replay":
        rec = _latest_capture(state, src, dst)
        if rec is None:
            return NoAttempt("nothing to replay")
        intended = _intended_replay(state, rec)
        return rec.wire, intended

    if strategy == "xor_recipe":
        rec = _latest_capture(state, src, dst)
        if rec is None:
            return NoAttempt("no observation")
        if not isinstance(rec.wire, (Nat, BitVec)):
            return NoAttempt("wire is not xor-shaped")
        mask = _mask_for(wire_space, rng)
        if type(mask) is not type(rec.wire):
            return NoAttempt("mask space does not match the wire")
        forged = xor_recipe(rec.wire, mask)
        applied = xor_value(forged, rec.wire)
        intended = _relational_intent(state, rec, applied)
        return forged, intended

    if strategy == "xor_sharp_recipe":
        rec = _latest_capture(state, src, dst)
        if rec is None or not isinstance(rec.wire, Pair) \
                or not isinstance(rec.wire.first, BitVec):
            return NoAttempt("no bitvec-pair observation")
        mask = _mask_for(wire_space, rng)
        if not isinstance(mask, Pair) or not isinstance(mask.first, BitVec):
            return NoAttempt("wire space is not a bitvec-pair space")
        forged = xor_sharp_recipe(rec.wire, mask)
        applied = xor_value(forged.first, rec.wire.first)
        intended = _relational_intent(state, rec, applied)
        return forged, intended

    if strategy == "dc_zero_remainder":
        x = Nat(1 + rng.next_below((1 << 16) - 1))
        payload: object = Pair(x, Nat(0))
        if isinstance(wire_space, TaggedSpace):
            payload = Tagged(1, payload)
        return payload, None

    if strategy == "random_wire":
        if wire_space is None:
            return NoAttempt("no wire space to sample")
        return sample_value(wire_space, rng), None

    if strategy == "param_reuse_oracle":
        leak = next((c for c in reversed(state.clear)
                     if c.params is not None and c.src == src and c.dst == dst),
                    None)
        if leak is None or lingo is None:
            return NoAttempt("no revealed parameters")
        chosen = leak.clear
        wire = apply_f(lingo, [chosen], leak.params)[0]
        return wire, chosen

    return NoAttempt(f"unknown strategy {strategy!r}")


def _ground_truth(state: AttackerState, rec: PublicRecord):
    return next((r for r in reversed(state.records)
                 if r.src == rec.src and r.dst == rec.dst and r.t == rec.t),
                None)


def _intended_replay(state: AttackerState, rec: PublicRecord):
    # Replay means "have the old plaintext accepted again"; the harness
    # resolves the intent from ground truth when scoring.
    full = _ground_truth(state, rec)
    return _Intent(full) if full is not None else None


def _relational_intent(state: AttackerState, rec: PublicRecord, applied: Value):
    # The xor recipes malleate relative to the (unknown) victim plaintext:
    # the mask that hit the wire also hits the decoded payload.
    full = _ground_truth(state, rec)
    if full is None:
        return None
    return _Intent(full, lambda plain: xor_value(plain, applied))


@dataclass
class _Intent:
    """Intended plaintext, resolvable only by the scoring harness (it holds
    the ground truth the strategy itself never sees)."""

    record: CapturedRecord
    transform: Optional[object] = None

    def resolve(self):
        plain = self.record.hidden.plaintext
        return self.transform(plain) if self.transform else plain


def attempt_forgery(state: AttackerState, strategy: str, target: tuple[str, str],
                    rng: Rng, wire_space=None, lingo: Optional[Lingo] = None
                    ) -> Union[Message, NoAttempt]:
    """Craft and address a forged message for the (src, dst) channel."""
    src, dst = target
    crafted = craft_forgery(state, strategy, src, dst, rng, wire_space, lingo)
    if isinstance(crafted, NoAttempt):
        return crafted
    payload, _ = crafted
    state.injected += 1
    return Message(dst=dst, src=src, payload=payload, injected=True,
                   strategy=strategy)


# ---------------------------------------------------------------------------
# Spoofing experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerMessage:
    def index(self, n: int) -> int:
        return n


@dataclass(frozen=True)
class ReuseK:
    k: int

    def index(self, n: int) -> int:
        return n // self.k


ParamPolicy = Union[PerMessage, ReuseK]


def wilson_interval(successes: int, trials: int, z: float = 1.96
                    ) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class ExperimentReport:
    lingo: str
    strategy: str
    policy: str
    trials: int
    compliance_hits: int
    spoof_hits: Optional[int]
    distinguish_hits: Optional[int] = None

    @property
    def compliance_rate(self) -> float:
        return self.compliance_hits / self.trials

    @property
    def spoof_rate(self) -> Optional[float]:
        return None if self.spoof_hits is None else self.spoof_hits / self.trials

    def to_json(self) -> dict:
        out = {
            "schema_version": 1,
            "lingo": self.lingo,
            "strategy": self.strategy,
            "policy": self.policy,
            "trials": self.trials,
            "compliance": {
                "rate": self.compliance_rate,
                "wilson95": list(wilson_interval(self.compliance_hits, self.trials)),
            },
        }
        if self.spoof_hits is not None:
            out["spoof"] = {
                "rate": self.spoof_rate,
                "wilson95": list(wilson_interval(self.spoof_hits, self.trials)),
            }
        else:
            out["spoof"] = None
        if self.distinguish_hits is not None:
            rate = self.distinguish_hits / self.trials
            out["distinguish"] = {"guess_rate": rate, "advantage": rate - 0.5}
        return out


def _policy_name(policy: ParamPolicy) -> str:
    return "per_message" if isinstance(policy, PerMessage) else f"reuse_{policy.k}"


def run_spoof_experiment(lingo: Lingo, param_policy: ParamPolicy, strategy: str,
                         trials: int, seed: int, observations: int = 1,
                         advantage: Optional[AdvantageConfig] = None
                         ) -> ExperimentReport:
    """Per trial: emit a short honest exchange under the parameter policy,
    let the strategy observe and forge once, then score the forgery against
    the receiver's next parameter.

    Scores both compliance (the forgery check) and, when the strategy
    declares an intent, actual spoofing (the receiver decodes exactly the
    plaintext the attacker meant).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    compliance_hits = 0
    spoof_hits = 0
    any_intent = False

    for t in range(trials):
        trial_seed = subkey(seed, fnv64("spoof-trial"), t)
        state = AttackerState(advantage=advantage or AdvantageConfig.zero())
        rng = Rng(trial_seed, ATTACKER_TAG)
        in_rng = Rng(trial_seed, fnv64("honest-plaintext"))
        for i in range(observations):
            a_i = lingo.param(param_policy.index(i), trial_seed)
            d_i = sample_value(lingo.input_space, in_rng)
            [wire] = apply_f(lingo, [d_i], a_i)
            msg = Message(dst="dst", src="src", payload=wire, seq=i)
            observe(state, msg, t=i,
                    hidden=HiddenCtx(lingo_name=lingo.name, param=a_i,
                                     plaintext=d_i, index=i, dialected=True))
        if advantage is not None:
            reveal_sweep(state, now=observations, rng=rng)

        crafted = craft_forgery(state, strategy, "src", "dst", rng,
                                wire_space=lingo.output_space, lingo=lingo)
        if isinstance(crafted, NoAttempt):
            continue
        forged, intent = crafted
        a_cur = lingo.param(param_policy.index(observations), trial_seed)

        if is_compliant(lingo, [forged], a_cur):
            compliance_hits += 1
        if intent is not None:
            any_intent = True
            decoded = apply_g(lingo, [forged], a_cur)
            if isinstance(decoded, DefaultFallback):
                decoded = DecodeFailure("fallback")
            if not isinstance(decoded, DecodeFailure):
                want = intent.resolve() if isinstance(intent, _Intent) else intent
                if decoded[0] == want:
                    spoof_hits += 1

    return ExperimentReport(lingo=lingo.name, strategy=strategy,
                            policy=_policy_name(param_policy), trials=trials,
                            compliance_hits=compliance_hits,
                            spoof_hits=spoof_hits if any_intent else None)


def run_match_experiment(lingo: Lingo, strategy: str, trials: int, seed: int,
                         transcript_len: int = 4) -> ExperimentReport:
    """Distinguishing game: the strategy guesses whether two transcripts
    share the same fixed parameter.  Only strategies with a guess function
    participate; others report no distinguishing data."""
    guesser = _GUESSERS.get(strategy)
    hits: Optional[int] = 0 if guesser else None
    for t in range(trials):
        trial_seed = subkey(seed, fnv64("match-trial"), t)
        rng = Rng(trial_seed, ATTACKER_TAG)
        in_rng = Rng(trial_seed, fnv64("honest-plaintext"))
        p = lingo.param(0, trial_seed)
        p_other = lingo.param(1, trial_seed)
        same = rng.next_u64() & 1 == 1
        q = p if same else p_other
        t1 = [apply_f(lingo, [sample_value(lingo.input_space, in_rng)], p)[0]
              for _ in range(transcript_len)]
        t2 = [apply_f(lingo, [sample_value(lingo.input_space, in_rng)], q)[0]
              for _ in range(transcript_len)]
        if guesser is not None and guesser(t1, t2) == same:
            hits += 1
    return ExperimentReport(lingo=lingo.name, strategy=strategy,
                            policy="match", trials=trials,
                            compliance_hits=0, spoof_hits=None,
                            distinguish_hits=hits)


def _guess_dc_remainders(t1: list[Value], t2: list[Value]) -> bool:
    # Remainders stay below a+2; transcripts with compatible remainder
    # ceilings look like the same parameter.
    def ceiling(ts):
        return max((w.second.n for w in ts if isinstance(w, Pair)), default=0)

    return ceiling(t2) <= ceiling(t1) + 1


_GUESSERS = {"dc_zero_remainder": _guess_dc_remainders}
