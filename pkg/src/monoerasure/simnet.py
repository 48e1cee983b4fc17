"""Deterministic discrete-event simulator for dispersal and retrieval.

One message is delivered per step.  The order is chosen by the scenario
script first, then by a seeded random picker; with fairness enabled any
message that has waited ``max_wait`` steps is delivered oldest first.
Only channels touching a corrupt node may lose messages.

Corrupt nodes follow one of these behaviors:

``crash[:N]``         emit the first ``N`` messages (default 0), then stop
``mute``              process messages but never send
``equivocate``        as dealer, split the servers in two and disperse a
                      different file to each half; otherwise honest
``corrupt-fragment``  as dealer, commit to a vector that is not a codeword;
                      otherwise garble every fragment it sends
``honest``            follow the protocol (useful with scripted injections)
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .access import contains_member, mask_of
from .codes import LinearCode, encode
from .construct import build_lp_code
from .errors import ScenarioError
from .gavid.protocol import (
    ABORT, DELIVERED, ECHO, FRAGMENT, READY, RETRIEVED, SEND, STORED, GavidConfig,
    Message, Output, Server, disperse_messages, make_config,
)
from .packing import pack_bytes
from .quorum import QuorumContext, context_from_json

STEP_CAP = 10 ** 6
BEHAVIORS = ("crash", "mute", "equivocate", "corrupt-fragment", "honest")


@dataclass(frozen=True)
class Scenario:
    quorum: QuorumContext
    dealer: int
    file: tuple[int, ...]
    corrupt: tuple[tuple[int, str], ...] = ()
    script: tuple[dict, ...] = ()
    seed: int = 0
    fairness: bool = True
    scheme: str = "vector"
    mode: str = "disperse"
    retrievers: Optional[tuple[int, ...]] = None
    code: Optional[LinearCode] = None
    max_wait: int = 64

    @property
    def corrupt_nodes(self) -> dict[int, str]:
        return dict(self.corrupt)

    @property
    def honest(self) -> list[int]:
        bad = self.corrupt_nodes
        return [i for i in range(self.quorum.n) if i not in bad]


@dataclass
class Metrics:
    counts: Counter = field(default_factory=Counter)
    bytes: int = 0
    dropped: int = 0
    injected: int = 0
    stored_bytes: dict = field(default_factory=dict)
    steps: int = 0

    def as_dict(self, nodes) -> dict:
        return {
            "counts": {k: self.counts[k] for k in sorted(self.counts)},
            "bytes": self.bytes,
            "dropped": self.dropped,
            "injected": self.injected,
            "stored_bytes": {nodes[i]: b for i, b in sorted(self.stored_bytes.items())},
            "steps": self.steps,
        }


@dataclass
class RunResult:
    scenario: Scenario
    config: GavidConfig
    transcript: list[dict]
    metrics: Metrics
    outputs: dict[int, Output]
    retrieved: dict[int, tuple[int, ...]]
    honest_ready: set
    servers: list[Server]


@dataclass
class _Pending:
    seq: int
    ready_at: int
    msg: Message
    injected: bool = False


def _prefix(c: Optional[bytes]) -> Optional[str]:
    return None if c is None else hashlib.sha256(c).hexdigest()[:8]


def _matches(rule: dict, msg: Message, nodes) -> bool:
    for key, value in (("from", msg.sender), ("to", msg.receiver)):
        want = rule.get(key, "*")
        if want != "*" and want != nodes[value]:
            return False
    kind = rule.get("kind", "*")
    return kind == "*" or kind == msg.kind


class _Node:
    """A server plus the filter its behavior applies to outgoing messages."""

    def __init__(self, server: Server, behavior: Optional[str], rng: random.Random):
        self.server = server
        self.behavior = behavior or "honest"
        self.budget = None
        if self.behavior.startswith("crash"):
            _, _, count = self.behavior.partition(":")
            self.budget = int(count) if count else 0
            self.behavior = "crash"
        self.rng = rng

    @property
    def alive(self) -> bool:
        return self.behavior != "crash" or self.budget > 0

    def outgoing(self, msgs: list[Message]) -> list[Message]:
        if self.behavior == "mute":
            return []
        if self.behavior == "crash":
            keep = msgs[:self.budget]
            self.budget -= len(keep)
            return keep
        if self.behavior == "corrupt-fragment":
            return [_garble(m, self.server.config) if m.kind in (ECHO, READY, FRAGMENT) else m
                    for m in msgs]
        return msgs


def _garble(msg: Message, config: GavidConfig) -> Message:
    q = config.code.q
    frag = (0,) if msg.fragment is None else tuple((x + 1) % q for x in msg.fragment)
    return replace(msg, fragment=frag)


def _dealer_messages(node: _Node, config: GavidConfig, f: Sequence[int]) -> list[Message]:
    dealer = node.server.index
    n = config.n
    if node.behavior == "equivocate":
        other = tuple((x + 1) % config.code.q for x in f)
        order = list(range(n))
        node.rng.shuffle(order)
        cut = node.rng.randint(1, n - 1)
        first = set(order[:cut])
        a = disperse_messages(config, dealer, encode(config.code, f))
        b = disperse_messages(config, dealer, encode(config.code, other))
        return [a[j] if j in first else b[j] for j in range(n)]
    if node.behavior == "corrupt-fragment":
        frags = list(encode(config.code, f))
        targets = [j for j in range(n) if frags[j] is not None]
        j = node.rng.choice(targets)
        frags[j] = tuple((x + 1) % config.code.q for x in frags[j])
        return disperse_messages(config, dealer, frags)
    return node.server.disperse_init(f)


def _check_script(scenario: Scenario) -> None:
    nodes = scenario.quorum.nodes
    bad = {nodes[i] for i in scenario.corrupt_nodes}
    for d in scenario.script:
        op = d.get("op")
        if op == "drop":
            if d.get("from") not in bad and d.get("to") not in bad:
                raise ScenarioError("drop rules must name a corrupt sender or receiver")
        elif op == "send":
            if d.get("message", {}).get("from") not in bad:
                raise ScenarioError("only corrupt nodes may inject messages")
        elif op not in ("delay", "deliver"):
            raise ScenarioError(f"unknown script directive {op!r}")


def _injected(d: dict, nodes) -> Message:
    m = d["message"]
    index = {name: i for i, name in enumerate(nodes)}
    try:
        c = bytes.fromhex(m["commitment"]) if m.get("commitment") is not None else None
        frag = None if m.get("fragment") is None else tuple(int(x) for x in m["fragment"])
        proof = tuple(bytes.fromhex(p) for p in m.get("proof", []))
        return Message(m["kind"], index[m["from"]], index[m["to"]], c, frag, proof)
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"malformed injected message: {exc}") from None


def run(scenario: Scenario) -> RunResult:
    q = scenario.quorum
    n = q.n
    bad = scenario.corrupt_nodes
    if not 0 <= scenario.dealer < n:
        raise ScenarioError("dealer is outside the universe")
    if bad and not any(mask_of(bad) & ~fp == 0 for fp in q.fail_prone):
        raise ScenarioError("the corrupt set is not contained in any fail-prone set")
    for b in bad.values():
        if b.partition(":")[0] not in BEHAVIORS:
            raise ScenarioError(f"unknown behavior {b!r}")
    _check_script(scenario)
    config = make_config(q, scenario.scheme, scenario.mode, scenario.code)
    if len(scenario.file) != config.code.k:
        raise ScenarioError(f"file has {len(scenario.file)} symbols, code expects {config.code.k}")

    rng = random.Random(scenario.seed)
    nodes = [_Node(Server(config, i, scenario.dealer), bad.get(i), random.Random(f"{scenario.seed}:{i}"))
             for i in range(n)]
    names = q.nodes
    drops = [d for d in scenario.script if d["op"] == "drop"]
    delays = [d for d in scenario.script if d["op"] == "delay"]
    directives = [d for d in scenario.script if d["op"] == "deliver"]
    injections = sorted((d for d in scenario.script if d["op"] == "send"), key=lambda d: d.get("at", 0))

    pending: list[_Pending] = []
    transcript: list[dict] = []
    metrics = Metrics()
    outputs: dict[int, Output] = {}
    retrieved: dict[int, tuple[int, ...]] = {}
    honest_ready: set = set()
    seq = 0
    step = 0

    def record(msg: Message, dropped: bool):
        transcript.append({"step": step, "from": names[msg.sender], "to": names[msg.receiver],
                           "kind": msg.kind, "D_prefix_8hex": _prefix(msg.commitment),
                           "dropped": dropped})

    def enqueue(msgs: list[Message], injected: bool = False):
        nonlocal seq
        for msg in msgs:
            if injected:
                metrics.injected += 1
            else:
                metrics.counts[msg.kind] += 1
                metrics.bytes += msg.size()
                if msg.kind == READY and msg.sender not in bad:
                    honest_ready.add(msg.commitment)
            touches_bad = msg.sender in bad or msg.receiver in bad
            if touches_bad and any(_matches(d, msg, names) for d in drops):
                metrics.dropped += 1
                record(msg, True)
                continue
            wait = max((d.get("steps", 0) for d in delays if _matches(d, msg, names)), default=0)
            pending.append(_Pending(seq, step + wait, msg, injected))
            seq += 1

    def deliver(p: _Pending):
        msg = p.msg
        record(msg, False)
        node = nodes[msg.receiver]
        if not node.alive:
            return
        out, outs = node.server.handle_message(msg)
        enqueue(node.outgoing(out))
        if msg.receiver in bad:
            return
        for o in outs:
            if o.kind == RETRIEVED:
                retrieved.setdefault(o.node, o.value)
            else:
                outputs.setdefault(o.node, o)

    def drain():
        nonlocal step
        while True:
            while injections and injections[0].get("at", 0) <= step:
                enqueue([_injected(injections.pop(0), names)], injected=True)
            if not pending:
                if injections:
                    step = injections[0].get("at", 0)
                    continue
                return
            eligible = [p for p in pending if p.ready_at <= step]
            if not eligible:
                step = min(p.ready_at for p in pending)
                continue
            choice = None
            while directives:
                head = directives[0]
                choice = next((p for p in eligible if _matches(head, p.msg, names)), None)
                if choice is not None or not any(_matches(head, p.msg, names) for p in pending):
                    directives.pop(0)
                if choice is not None or any(_matches(head, p.msg, names) for p in pending):
                    break
            if choice is None and scenario.fairness:
                oldest = min(eligible, key=lambda p: p.seq)
                if step - oldest.ready_at >= scenario.max_wait:
                    choice = oldest
            if choice is None:
                choice = eligible[rng.randrange(len(eligible))]
            pending.remove(choice)
            deliver(choice)
            step += 1
            metrics.steps += 1
            if step >= STEP_CAP:
                raise ScenarioError(f"step cap of {STEP_CAP} reached")

    dealer = nodes[scenario.dealer]
    enqueue(dealer.outgoing(_dealer_messages(dealer, config, scenario.file)))
    drain()
    retrievers = scenario.retrievers if scenario.retrievers is not None else tuple(scenario.honest)
    for r in retrievers:
        if nodes[r].alive:
            enqueue(nodes[r].outgoing(nodes[r].server.retrieve_init()))
    drain()

    for i, node in enumerate(nodes):
        if i not in bad and node.server.stored is not None:
            metrics.stored_bytes[i] = node.server.stored.size(i)
    return RunResult(scenario, config, transcript, metrics, outputs, retrieved,
                     honest_ready, [nd.server for nd in nodes])


def check_properties(result: RunResult) -> list[str]:
    """Safety and liveness conditions for one finished execution."""
    sc = result.scenario
    cfg = result.config
    n = cfg.n
    honest = sc.honest
    dealer_honest = sc.dealer in honest
    out = result.outputs
    problems = []

    if len(result.honest_ready) > 1:
        problems.append(f"honest READY messages carry {len(result.honest_ready)} commitments")
    finished = STORED if sc.mode == "disperse" else DELIVERED
    done = [i for i in honest if i in out and out[i].kind == finished]
    aborted = [i for i in honest if i in out and out[i].kind == ABORT]
    if done and aborted:
        problems.append("some honest servers finished while others aborted")
    if len({out[i].commitment for i in done}) > 1:
        problems.append("honest servers finished on different commitments")
    if sc.fairness and done and len(done) != len(honest):
        problems.append(f"agreement: {len(done)} of {len(honest)} honest servers finished")
    if dealer_honest and len(done) != len(honest):
        problems.append(f"termination: honest dealer but {len(done)} of {len(honest)} finished")
    if sc.mode == "broadcast":
        values = {out[i].value for i in done}
        if len(values) > 1:
            problems.append("honest servers delivered different values")
        if dealer_honest and values and values != {tuple(sc.file)}:
            problems.append("delivered value differs from the dealer's file")
    else:
        stored_mask = mask_of(done)
        retrievers = sc.retrievers if sc.retrievers is not None else tuple(honest)
        honest_retrievers = [r for r in retrievers if r in honest]
        got = {r: result.retrieved[r] for r in honest_retrievers if r in result.retrieved}
        if len(set(got.values())) > 1:
            problems.append("honest retrievers obtained different files")
        if contains_member(stored_mask, cfg.quorum.kernels) and sc.fairness:
            missing = [r for r in honest_retrievers if r not in got]
            if missing:
                problems.append(f"availability: {len(missing)} honest retrievers got nothing")
        if dealer_honest and any(v != tuple(sc.file) for v in got.values()):
            problems.append("retrieved file differs from the dealer's file")
    c = result.metrics.counts
    if c[SEND] > n or c[ECHO] > n * n or c[READY] > n * n:
        problems.append(f"message bounds exceeded: {dict(c)}")
    return problems


@dataclass
class SweepReport:
    runs: int = 0
    violations: list = field(default_factory=list)
    honest_dealer_runs: int = 0
    terminated: int = 0

    def as_dict(self) -> dict:
        return {"runs": self.runs, "violations": self.violations,
                "honest_dealer_runs": self.honest_dealer_runs, "terminated": self.terminated}


def sweep(template: Scenario, seeds: Sequence[int]) -> SweepReport:
    report = SweepReport()
    for seed in seeds:
        result = run(replace(template, seed=seed))
        report.runs += 1
        for p in check_properties(result):
            report.violations.append({"seed": seed, "problem": p})
        if template.dealer in template.honest:
            report.honest_dealer_runs += 1
            finished = STORED if template.mode == "disperse" else DELIVERED
            if all(i in result.outputs and result.outputs[i].kind == finished
                   for i in template.honest):
                report.terminated += 1
    return report


# -- scenario files -----------------------------------------------------------

def scenario_from_json(obj: dict) -> Scenario:
    try:
        quorum = context_from_json(obj["quorum"])
        nodes = quorum.nodes
        index = {name: i for i, name in enumerate(nodes)}
        dealer = index[obj["dealer"]]
        behaviors = obj.get("behaviors", {})
        corrupt = tuple((index[name], behaviors.get(name, "crash")) for name in obj.get("corrupt", []))
        for name in behaviors:
            if name not in obj.get("corrupt", []):
                raise ScenarioError(f"behavior given for non-corrupt node {name}")
        scheme = obj.get("scheme", "vector")
        mode = obj.get("mode", "disperse")
        retrievers = obj.get("retrieve")
        if retrievers is not None:
            retrievers = tuple(index[r] for r in retrievers)
        file, code = _file_and_code(obj.get("file", {"random": {"seed": 0}}), quorum)
        return Scenario(quorum, dealer, file, corrupt, tuple(obj.get("script", [])),
                        int(obj.get("seed", 0)), bool(obj.get("fairness", True)), scheme, mode,
                        retrievers, code, int(obj.get("max_wait", 64)))
    except KeyError as exc:
        raise ScenarioError(f"scenario refers to unknown or missing item {exc}") from None


def _file_and_code(source: dict, quorum: QuorumContext) -> tuple[tuple[int, ...], LinearCode]:
    """The dealer's message and a code whose dimension fits it.

    Hex files grow the code dimension (in multiples of the LP optimum)
    until the packed bytes fit in a single codeword.
    """
    structure = quorum.kernel_structure()
    code = build_lp_code(structure).code
    if "symbols" in source:
        return tuple(int(x) for x in source["symbols"]), code
    if "hex" in source:
        data = bytes.fromhex(source["hex"])
        mult = 1
        while True:
            symbols, _ = pack_bytes(data, code.q, code.k)
            if len(symbols) == code.k:
                return tuple(symbols), code
            mult += 1
            code = build_lp_code(structure, k_multiplier=mult).code
    if "random" in source:
        r = source["random"]
        length = int(r.get("len", code.k))
        g = random.Random(int(r.get("seed", 0)))
        return tuple(g.randrange(code.q) for _ in range(length)), code
    raise ScenarioError("file must give symbols, hex or random")
