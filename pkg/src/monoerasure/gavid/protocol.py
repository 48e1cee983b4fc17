"""Verifiable information dispersal over a general quorum system.

Each server is a deterministic state machine: feed it one message, get back
the messages it sends and the outputs it produces.  No I/O happens here;
the simulator in :mod:`monoerasure.simnet` moves messages around.

Dispersal: the dealer encodes the file, commits to the fragments and sends
each server its own fragment.  Servers echo valid fragments to everyone.
Once the echoes for a commitment cover a quorum, or the readies cover a
kernel, a server decodes, re-encodes, checks the whole commitment and sends
READY with its own fragment.  Readies covering a reliable set let a server
store its fragment.  Retrieval asks everyone for stored fragments and
decodes once the valid replies cover a kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..access import contains_member, mask_of
from ..codes import Fragment, LinearCode, decode, encode, is_complete
from ..errors import ConstructionError
from ..quorum import QuorumContext
from .commit import SCHEMES, fragment_bytes, fragment_fits

SEND, ECHO, READY, RETRIEVE, FRAGMENT = "send", "echo", "ready", "retrieve", "fragment"
KINDS = (SEND, ECHO, READY, RETRIEVE, FRAGMENT)

STORED, ABORT, DELIVERED, RETRIEVED = "stored", "abort", "delivered", "retrieved"


@dataclass(frozen=True)
class Message:
    kind: str
    sender: int
    receiver: int
    commitment: Optional[bytes] = None
    fragment: Fragment = None
    proof: tuple[bytes, ...] = ()

    def size(self) -> int:
        """Payload bytes: commitment, fragment encoding and proof."""
        total = len(self.commitment or b"") + 32 * len(self.proof)
        if self.kind != RETRIEVE:
            total += len(fragment_bytes(self.sender if self.kind != SEND else self.receiver,
                                        self.fragment))
        return total


@dataclass(frozen=True)
class Output:
    kind: str
    node: int
    commitment: Optional[bytes] = None
    value: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class GavidConfig:
    quorum: QuorumContext
    code: LinearCode
    scheme: str = "vector"
    mode: str = "disperse"

    def __post_init__(self):
        if self.code.nodes != self.quorum.nodes:
            raise ConstructionError("code and quorum system use different universes")
        if self.scheme not in SCHEMES:
            raise ConstructionError(f"unknown commitment scheme {self.scheme!r}")
        if self.mode not in ("disperse", "broadcast"):
            raise ConstructionError(f"unknown mode {self.mode!r}")
        if not is_complete(self.code, self.quorum.kernel_structure()):
            raise ConstructionError("the code cannot be decoded from every kernel")

    @property
    def n(self) -> int:
        return self.quorum.n

    @property
    def commitments(self):
        return SCHEMES[self.scheme]


def make_config(quorum: QuorumContext, scheme: str = "vector", mode: str = "disperse",
                code: Optional[LinearCode] = None) -> GavidConfig:
    """Default code: the LP-optimal code for the kernel structure."""
    if code is None:
        from ..construct import build_lp_code
        code = build_lp_code(quorum.kernel_structure()).code
    return GavidConfig(quorum, code, scheme, mode)


def disperse_messages(config: GavidConfig, dealer: int, fragments: Sequence[Fragment]) -> list[Message]:
    """SEND messages for an arbitrary fragment vector (honest or not)."""
    c, proofs = config.commitments.commit(fragments)
    return [Message(SEND, dealer, j, c, fragments[j], proofs[j]) for j in range(config.n)]


@dataclass
class StoredFragment:
    commitment: bytes
    fragment: Fragment
    proof: tuple[bytes, ...]

    def size(self, node: int) -> int:
        return len(fragment_bytes(node, self.fragment)) + len(self.commitment) + 32 * len(self.proof)


@dataclass
class Server:
    config: GavidConfig
    index: int
    dealer: int
    echoes: dict = field(default_factory=dict)
    readies: dict = field(default_factory=dict)
    valid: dict = field(default_factory=dict)
    seen: set = field(default_factory=set)
    send_seen: bool = False
    ready_sent: set = field(default_factory=set)
    own: dict = field(default_factory=dict)
    stored: Optional[StoredFragment] = None
    output: Optional[str] = None
    halted: bool = False
    # retrieval
    retrieving: bool = False
    answered: set = field(default_factory=set)
    waiting: set = field(default_factory=set)
    replies: dict = field(default_factory=dict)
    retrieved: Optional[tuple[int, ...]] = None

    # -- helpers -------------------------------------------------------------

    def _broadcast(self, kind, c, frag, proof) -> list[Message]:
        return [Message(kind, self.index, j, c, frag, proof) for j in range(self.config.n)]

    def _valid(self, c, node, frag, proof) -> bool:
        cfg = self.config
        if not fragment_fits(cfg.code, node, frag):
            return False
        return cfg.commitments.check(c, cfg.n, node, frag, proof)

    def _first(self, sender, kind, c) -> bool:
        key = (sender, kind, c)
        if key in self.seen:
            return False
        self.seen.add(key)
        return True

    # -- dispersal -----------------------------------------------------------

    def disperse_init(self, f: Sequence[int]) -> list[Message]:
        """Dealer entry point: encode ``f`` and address one SEND per server."""
        return disperse_messages(self.config, self.index, encode(self.config.code, f))

    def handle_message(self, msg: Message) -> tuple[list[Message], list[Output]]:
        if msg.receiver != self.index:
            return [], []
        if msg.kind == RETRIEVE:
            return self._on_retrieve(msg), []
        if msg.kind == FRAGMENT:
            return [], self._on_fragment(msg)
        if self.halted:
            return [], []
        if msg.kind == SEND:
            return self._on_send(msg), []
        if msg.kind in (ECHO, READY):
            out, outputs = self._on_vote(msg)
            if self.stored is not None and self.waiting:
                out += self.pending_replies()
            return out, outputs
        return [], []

    def _on_send(self, msg: Message) -> list[Message]:
        if msg.sender != self.dealer or self.send_seen:
            return []
        self.send_seen = True
        if not self._valid(msg.commitment, self.index, msg.fragment, msg.proof):
            return []
        self.own.setdefault(msg.commitment, (msg.fragment, msg.proof))
        return self._broadcast(ECHO, msg.commitment, msg.fragment, msg.proof)

    def _on_vote(self, msg: Message):
        c = msg.commitment
        if not isinstance(c, bytes) or not self._first(msg.sender, msg.kind, c):
            return [], []
        if not self._valid(c, msg.sender, msg.fragment, msg.proof):
            return [], []
        self.valid.setdefault(c, {}).setdefault(msg.sender, msg.fragment)
        book = self.echoes if msg.kind == ECHO else self.readies
        book[c] = book.get(c, 0) | 1 << msg.sender
        out: list[Message] = []
        outputs: list[Output] = []
        if c not in self.ready_sent:
            q = self.config.quorum
            if msg.kind == ECHO and contains_member(self.echoes[c], q.quorums):
                out, outputs = self._reconstruct(c)
            elif msg.kind == READY and contains_member(self.readies[c], q.kernels):
                out, outputs = self._reconstruct(c)
        if not self.halted:
            outputs += self._maybe_finish(c)
        return out, outputs

    def _reconstruct(self, c: bytes):
        """Decode, re-encode and check the full commitment, then send READY."""
        cfg = self.config
        frags = self.valid.get(c, {})
        f = decode(cfg.code, [frags.get(j) for j in range(cfg.n)])
        if f is not None:
            again = encode(cfg.code, f)
            c2, proofs = cfg.commitments.commit(again)
            if c2 == c:
                self.ready_sent.add(c)
                self.own[c] = (again[self.index], proofs[self.index])
                return self._broadcast(READY, c, again[self.index], proofs[self.index]), []
        self.halted = True
        return [], self._emit(ABORT, c)

    def _emit(self, kind, c, value=None) -> list[Output]:
        if self.output is not None:
            return []
        self.output = kind
        return [Output(kind, self.index, c, value)]

    def _maybe_finish(self, c: bytes) -> list[Output]:
        if self.output is not None or c not in self.ready_sent:
            return []
        if not contains_member(self.readies.get(c, 0), self.config.quorum.reliable):
            return []
        if self.config.mode == "broadcast":
            frags = self.valid[c]
            value = decode(self.config.code, [frags.get(j) for j in range(self.config.n)])
            return self._emit(DELIVERED, c, value)
        frag, proof = self.own[c]
        self.stored = StoredFragment(c, frag, proof)
        return self._emit(STORED, c)

    def pending_replies(self) -> list[Message]:
        """Answers owed to retrievers that asked before this server stored."""
        if self.stored is None:
            return []
        out = []
        for j in sorted(self.waiting):
            out.append(self._reply(j))
        self.waiting.clear()
        return out

    # -- retrieval -----------------------------------------------------------

    def retrieve_init(self) -> list[Message]:
        if self.retrieving:
            return []
        self.retrieving = True
        return [Message(RETRIEVE, self.index, j) for j in range(self.config.n)]

    def _reply(self, j: int) -> Message:
        s = self.stored
        self.answered.add(j)
        return Message(FRAGMENT, self.index, j, s.commitment, s.fragment, s.proof)

    def _on_retrieve(self, msg: Message) -> list[Message]:
        j = msg.sender
        if j in self.answered:
            return []
        if self.stored is None:
            self.waiting.add(j)
            return []
        return [self._reply(j)]

    def _on_fragment(self, msg: Message) -> list[Output]:
        c = msg.commitment
        if not self.retrieving or self.retrieved is not None or not isinstance(c, bytes):
            return []
        if not self._first(msg.sender, FRAGMENT, c):
            return []
        if not self._valid(c, msg.sender, msg.fragment, msg.proof):
            return []
        got = self.replies.setdefault(c, {})
        got[msg.sender] = msg.fragment
        if not contains_member(mask_of(got), self.config.quorum.kernels):
            return []
        f = decode(self.config.code, [got.get(j) for j in range(self.config.n)])
        if f is None:
            return []
        self.retrieved = f
        return [Output(RETRIEVED, self.index, c, f)]


def handle_message(server: Server, msg: Message):
    """Functional-style entry point; returns ``(server, messages, outputs)``."""
    out, outputs = server.handle_message(msg)
    return server, out, outputs
