"""Toy MQTT: client and broker state machines plus the payload codec.

Clients work through an ordered command list (connect, subscribe,
unsubscribe, publish, disconnect), blocking until the broker acknowledges
where an acknowledgement exists.  The broker tracks connected peers and
per-topic subscriber sets and fans published values out to subscribers.

``encode_mqtt``/``decode_mqtt`` map protocol messages to payload values:
one tag byte followed by length-prefixed UTF-8 fields, read big-endian as a
natural or zero-padded into a bit-vector of configured width.  The decoder
is a strict parser: anything not produced by the encoder comes back as
MalformedPayload instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

from .transforms import DataAdaptor, RetractFailure, WidthOverflow
from .values import (
    BitVec,
    BitVecSpace,
    Nat,
    NatSpace,
    Space,
    Value,
)


# ---------------------------------------------------------------------------
# Commands and messages
# ---------------------------------------------------------------------------

def _check_field(s: str, what: str) -> str:
    data = s.encode("utf-8")
    if not 1 <= len(data) <= 255:
        raise ValueError(f"{what} must be 1..255 UTF-8 bytes")
    return s


@dataclass(frozen=True)
class Connect:
    broker: str


@dataclass(frozen=True)
class Subscribe:
    topic: str


@dataclass(frozen=True)
class Unsubscribe:
    topic: str


@dataclass(frozen=True)
class Publish:
    topic: str
    value: str


@dataclass(frozen=True)
class Disconnect:
    pass


Command = Union[Connect, Subscribe, Unsubscribe, Publish, Disconnect]


@dataclass(frozen=True)
class ConnectMsg:
    broker: str


@dataclass(frozen=True)
class ConnAck:
    pass


@dataclass(frozen=True)
class SubMsg:
    topic: str


@dataclass(frozen=True)
class SubAck:
    pass


@dataclass(frozen=True)
class UnsubMsg:
    topic: str


@dataclass(frozen=True)
class UnsubAck:
    pass


@dataclass(frozen=True)
class PubMsg:
    topic: str
    value: str


@dataclass(frozen=True)
class Forward:
    topic: str
    value: str


@dataclass(frozen=True)
class DisconnectMsg:
    pass


MqttMsg = Union[ConnectMsg, ConnAck, SubMsg, SubAck, UnsubMsg, UnsubAck,
                PubMsg, Forward, DisconnectMsg]


@dataclass(frozen=True)
class Reject:
    """Protocol-level rejection of an incoming message."""

    reason: str = ""


# ---------------------------------------------------------------------------
# Actors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MqttClient:
    oid: str
    peer: Optional[str] = None
    cmd_list: tuple[Command, ...] = ()
    last_recv: tuple[tuple[str, str], ...] = ()
    awaiting: Optional[str] = None   # blocks the command list until acked

    def last_recv_map(self) -> dict[str, str]:
        return dict(self.last_recv)

    def _with_recv(self, topic: str, value: str) -> "MqttClient":
        entries = dict(self.last_recv)
        entries[topic] = value
        return replace(self, last_recv=tuple(sorted(entries.items())))


@dataclass(frozen=True)
class MqttBroker:
    oid: str
    peers: frozenset[str] = frozenset()
    subscribers: tuple[tuple[str, frozenset[str]], ...] = ()

    def subscriber_map(self) -> dict[str, frozenset[str]]:
        return dict(self.subscribers)

    def _with_subscribers(self, subs: dict[str, frozenset[str]]) -> "MqttBroker":
        pruned = {t: s for t, s in subs.items() if s}
        return replace(self, subscribers=tuple(sorted(pruned.items())))


Actor = Union[MqttClient, MqttBroker]
Outbound = list[tuple[str, MqttMsg]]


def actor_step(actor: Actor, incoming: Optional[tuple[str, MqttMsg]]
               ) -> Union[tuple[Actor, Outbound], Reject]:
    """One transition: with ``incoming=None``, let the actor act
    spontaneously (clients working their command list); otherwise deliver
    ``(src, msg)``.  Unknown or ill-timed messages come back as Reject."""
    if isinstance(actor, MqttClient):
        return _client_step(actor, incoming)
    if isinstance(actor, MqttBroker):
        return _broker_step(actor, incoming)
    raise TypeError(f"not an actor: {actor!r}")


def _client_step(c: MqttClient, incoming) -> Union[tuple[Actor, Outbound], Reject]:
    if incoming is None:
        if c.awaiting is not None or not c.cmd_list:
            return c, []
        cmd, rest = c.cmd_list[0], c.cmd_list[1:]
        if isinstance(cmd, Connect):
            if c.peer is not None:
                return c, []
            return (replace(c, cmd_list=rest, awaiting="connack"),
                    [(cmd.broker, ConnectMsg(cmd.broker))])
        if c.peer is None:
            return c, []   # blocked until connected
        if isinstance(cmd, Subscribe):
            return (replace(c, cmd_list=rest, awaiting="suback"),
                    [(c.peer, SubMsg(cmd.topic))])
        if isinstance(cmd, Unsubscribe):
            return (replace(c, cmd_list=rest, awaiting="unsuback"),
                    [(c.peer, UnsubMsg(cmd.topic))])
        if isinstance(cmd, Publish):
            return (replace(c, cmd_list=rest),
                    [(c.peer, PubMsg(cmd.topic, cmd.value))])
        if isinstance(cmd, Disconnect):
            return (replace(c, cmd_list=rest, peer=None, awaiting=None),
                    [(c.peer, DisconnectMsg())])
        return c, []

    src, msg = incoming
    if isinstance(msg, ConnAck):
        if c.peer is None and c.awaiting == "connack":
            return replace(c, peer=src, awaiting=None), []
        return Reject("unexpected connack")
    if isinstance(msg, SubAck):
        if c.awaiting == "suback":
            return replace(c, awaiting=None), []
        return Reject("unexpected suback")
    if isinstance(msg, UnsubAck):
        if c.awaiting == "unsuback":
            return replace(c, awaiting=None), []
        return Reject("unexpected unsuback")
    if isinstance(msg, Forward):
        return c._with_recv(msg.topic, msg.value), []
    return Reject(f"client cannot handle {type(msg).__name__}")


def _broker_step(b: MqttBroker, incoming) -> Union[tuple[Actor, Outbound], Reject]:
    if incoming is None:
        return b, []
    src, msg = incoming
    if isinstance(msg, ConnectMsg):
        if msg.broker != b.oid:
            return Reject("connect addressed to a different broker")
        return replace(b, peers=b.peers | {src}), [(src, ConnAck())]
    if src not in b.peers:
        return Reject(f"{src} is not a connected peer")
    if isinstance(msg, SubMsg):
        subs = b.subscriber_map()
        subs[msg.topic] = subs.get(msg.topic, frozenset()) | {src}
        return b._with_subscribers(subs), [(src, SubAck())]
    if isinstance(msg, UnsubMsg):
        subs = b.subscriber_map()
        subs[msg.topic] = subs.get(msg.topic, frozenset()) - {src}
        return b._with_subscribers(subs), [(src, UnsubAck())]
    if isinstance(msg, PubMsg):
        targets = sorted(b.subscriber_map().get(msg.topic, frozenset()))
        return b, [(t, Forward(msg.topic, msg.value)) for t in targets]
    if isinstance(msg, DisconnectMsg):
        subs = {t: s - {src} for t, s in b.subscriber_map().items()}
        return replace(b, peers=b.peers - {src})._with_subscribers(subs), []
    return Reject(f"broker cannot handle {type(msg).__name__}")


# ---------------------------------------------------------------------------
# Payload codec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MalformedPayload:
    reason: str = ""


# Tag byte per message kind; a tag of 0 never occurs, so encodings are
# nonzero and survive the integer round trip without length framing.
_TAGS: list[tuple[type, int, tuple[str, ...]]] = [
    (ConnectMsg, 1, ("broker",)),
    (ConnAck, 2, ()),
    (SubMsg, 3, ("topic",)),
    (SubAck, 4, ()),
    (UnsubMsg, 5, ("topic",)),
    (UnsubAck, 6, ()),
    (PubMsg, 7, ("topic", "value")),
    (Forward, 8, ("topic", "value")),
    (DisconnectMsg, 9, ()),
]
_BY_TYPE = {t: (tag, fields) for t, tag, fields in _TAGS}
_BY_TAG = {tag: (t, fields) for t, tag, fields in _TAGS}

DEFAULT_BITVEC_WIDTH = 512


def encode_mqtt(msg: MqttMsg, width: Optional[int] = None) -> Value:
    """Message to payload value: a natural, or a width-bit vector when
    ``width`` is given (WidthOverflow if the encoding does not fit)."""
    tag, fields = _BY_TYPE[type(msg)]
    out = bytes([tag])
    for f in fields:
        data = _check_field(getattr(msg, f), f).encode("utf-8")
        out += bytes([len(data)]) + data
    n = int.from_bytes(out, "big")
    if width is None:
        return Nat(n)
    if len(out) * 8 > width:
        raise WidthOverflow(
            f"{type(msg).__name__} needs {len(out) * 8} bits, width is {width}")
    return BitVec(width, n)


def decode_mqtt(v: Value) -> Union[MqttMsg, MalformedPayload]:
    """Strict inverse of encode_mqtt; total over arbitrary values."""
    if isinstance(v, Nat):
        n = v.n
    elif isinstance(v, BitVec):
        if not v.in_range:
            return MalformedPayload("bits exceed declared width")
        n = v.bits
    else:
        return MalformedPayload(f"{type(v).__name__} payloads are not decodable")
    if n == 0:
        return MalformedPayload("empty payload")
    data = n.to_bytes((n.bit_length() + 7) // 8, "big")
    tag = data[0]
    if tag not in _BY_TAG:
        return MalformedPayload(f"unknown tag {tag}")
    msg_type, fields = _BY_TAG[tag]
    pos = 1
    parsed = []
    for _ in fields:
        if pos >= len(data):
            return MalformedPayload("truncated field")
        length = data[pos]
        pos += 1
        if length == 0 or pos + length > len(data):
            return MalformedPayload("bad field length")
        try:
            parsed.append(data[pos:pos + length].decode("utf-8"))
        except UnicodeDecodeError:
            return MalformedPayload("field is not UTF-8")
        pos += length
    if pos != len(data):
        return MalformedPayload("trailing bytes")
    return msg_type(*parsed)


def payload_space(width: Optional[int] = None) -> Space:
    return NatSpace() if width is None else BitVecSpace(width)


def mqtt_codec_adaptor(width: Optional[int] = None) -> DataAdaptor:
    """Section-retract pair between protocol messages and payload values;
    pre-composing it with a payload lingo yields a lingo on messages."""

    def r(v: Value):
        msg = decode_mqtt(v)
        if isinstance(msg, MalformedPayload):
            return RetractFailure(msg.reason)
        return msg

    return DataAdaptor(name="mqtt_codec", from_space=None,
                       to_space=payload_space(width),
                       j=lambda m: encode_mqtt(m, width), r=r,
                       retract_total=False, sparse_image=True)


def initial_configuration() -> list[Actor]:
    """Two clients and one broker: c1 subscribes to "temp", c2 publishes 34."""
    return [
        MqttClient(oid="c1", cmd_list=(Connect("b"), Subscribe("temp"))),
        MqttClient(oid="c2", cmd_list=(Connect("b"), Publish("temp", "34"))),
        MqttBroker(oid="b"),
    ]
