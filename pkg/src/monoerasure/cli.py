"""Command line interface.

Exit codes: 0 success, 2 bad usage or invalid input, 3 the available
nodes cannot decode, 4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .access import AccessTree, enumerate_minimal, mask_to_names, names_to_mask, parse_tree
from .codes import (
    LinearCode, canonical_json, code_from_manifest, code_hash, code_manifest,
    decode_blocks, is_sufficient,
)
from .construct import build_lp_code, build_partitioned_code, kronecker_to_code
from .errors import InternalError, MecError
from .field import vecmat
from .packing import pack_bytes, unpack_bytes
from .quorum import load_quorum_file
from .simnet import run, scenario_from_json, sweep

EXIT_OK, EXIT_USAGE, EXIT_INSUFFICIENT, EXIT_INTERNAL = 0, 2, 3, 4
METHODS = ("lp", "kronecker", "uniform", "optimal")


class Insufficient(Exception):
    pass


@dataclass
class Built:
    method: str
    code: LinearCode
    extra: dict

    def report(self) -> dict:
        per_node = self.code.columns_per_node()
        k, m = self.code.k, self.code.m
        out = {
            "method": self.method,
            "k": k,
            "m": m,
            "per_node": {name: per_node[i] for i, name in enumerate(self.code.nodes)},
            "beta": str(Fraction(m - k, k)),
            "q": self.code.q,
        }
        out.update(self.extra)
        return out


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def build_from_tree(tree: AccessTree, method: str) -> Built:
    if method == "lp":
        lp = build_lp_code(enumerate_minimal(tree))
        return Built(method, lp.code, {"objective": str(lp.solution.objective)})
    if method == "kronecker":
        return Built(method, kronecker_to_code(tree), {})
    _, code = build_partitioned_code(tree, via=method)
    return Built(method, code, {})


def _summary(report: dict) -> str:
    return f"k={report['k']} m={report['m']} beta={report['beta']} q={report['q']}"


def cmd_params(args) -> int:
    tree = parse_tree(_read(args.tree))
    report = build_from_tree(tree, args.method).report()
    if args.json:
        print(json.dumps(report, indent=2))
        return EXIT_OK
    print(_summary(report))
    print("per_node " + " ".join(f"{k}={v}" for k, v in report["per_node"].items()))
    if "objective" in report:
        print(f"objective={report['objective']}")
    return EXIT_OK


def cmd_build(args) -> int:
    text = _read(args.tree)
    tree = parse_tree(text)
    built = build_from_tree(tree, args.method)
    manifest = {
        "format": "monoerasure-code/1",
        "tool": {"name": "monoerasure", "version": __version__},
        "inputs": {"tree": text.strip(), "tree_sha256": hashlib.sha256(text.encode()).hexdigest()},
        "params": built.report(),
        "code": code_manifest(built.code),
    }
    _write(args.out, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(_summary(built.report()))
    return EXIT_OK


def _load_code(path: str):
    obj = _load_json(path)
    return obj, code_from_manifest(obj.get("code", obj))


def cmd_check(args) -> int:
    obj, code = _load_code(args.code)
    text = _read(args.tree) if args.tree else obj.get("inputs", {}).get("tree")
    if text is None:
        raise MecError("no access tree: pass --tree or use a manifest written by 'build'")
    tree = parse_tree(text, universe=code.nodes)
    structure = enumerate_minimal(tree)
    failing = [s for s in structure.sets if not is_sufficient(code, s)]
    if failing:
        for s in failing:
            print("insufficient: {" + ",".join(mask_to_names(s, code.nodes)) + "}")
        return EXIT_INSUFFICIENT
    print(f"complete: {len(structure.sets)} access sets verified")
    return EXIT_OK


def cmd_encode(args) -> int:
    _, code = _load_code(args.code)
    with open(args.file, "rb") as fh:
        data = fh.read()
    symbols, pad = pack_bytes(data, code.q, code.k)
    blocks = [symbols[i:i + code.k] for i in range(0, len(symbols), code.k)]
    words = [vecmat(b, code.generator) for b in blocks]
    digest = code_hash(code)
    os.makedirs(args.out, exist_ok=True)
    for node, name in enumerate(code.nodes):
        cols = code.columns_of(node)
        frag = [w[j] for w in words for j in cols] if cols else None
        entry = {"code_hash": digest, "node": name, "symbols": frag,
                 "blocks": len(blocks), "length": len(data), "pad": pad}
        _write(os.path.join(args.out, f"{name}.json"), canonical_json(entry) + "\n")
    print(f"encoded {len(data)} bytes into {len(blocks)} blocks for {code.n} nodes")
    return EXIT_OK


def cmd_decode(args) -> int:
    _, code = _load_code(args.code)
    digest = code_hash(code)
    wanted = args.nodes.split(",") if args.nodes else list(code.nodes)
    names_to_mask(wanted, code.nodes)
    entries = {}
    for name in wanted:
        path = os.path.join(args.fragments, f"{name}.json")
        if not os.path.exists(path):
            continue
        entry = _load_json(path)
        if entry.get("code_hash") != digest or entry.get("node") != name:
            raise MecError(f"fragment file {path} does not belong to this code")
        if entry.get("symbols") is not None:
            entries[name] = entry
    if not entries:
        raise Insufficient()
    meta = next(iter(entries.values()))
    nblocks, length = meta["blocks"], meta["length"]
    present = names_to_mask(entries, code.nodes)
    if not is_sufficient(code, present):
        raise Insufficient()
    rows = []
    for b in range(nblocks):
        row = []
        for node, name in enumerate(code.nodes):
            if name in entries:
                width = len(code.columns_of(node))
                row.extend(entries[name]["symbols"][b * width:(b + 1) * width])
        rows.append(row)
    solved = decode_blocks(code, present, rows)
    if solved is None:
        raise MecError("fragments are inconsistent with the code")
    symbols = [x for block in solved for x in block]
    data = unpack_bytes(symbols[:len(symbols) - meta["pad"]], code.q, length)
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"decoded {length} bytes from {len(entries)} nodes")
    return EXIT_OK


def cmd_sim(args) -> int:
    scenario = scenario_from_json(_load_json(args.scenario))
    if args.seeds:
        report = sweep(scenario, range(scenario.seed, scenario.seed + args.seeds))
        print(json.dumps(report.as_dict(), indent=2))
        return EXIT_OK if not report.violations else EXIT_INTERNAL
    result = run(scenario)
    lines = "".join(json.dumps(e) + "\n" for e in result.transcript)
    if args.transcript:
        _write(args.transcript, lines)
    print(json.dumps(result.metrics.as_dict(scenario.quorum.nodes), indent=2, sort_keys=True))
    honest = scenario.honest
    finished = "stored" if scenario.mode == "disperse" else "delivered"
    done = sum(1 for i in honest if i in result.outputs and result.outputs[i].kind == finished)
    print(f"{finished}: {done}/{len(honest)}")
    return EXIT_OK


def cmd_systems(args) -> int:
    ctx = load_quorum_file(args.quorum)
    desc = ctx.describe()
    if args.json:
        print(json.dumps(desc, indent=2))
        return EXIT_OK
    for key in ("quorums", "fail_prone", "kernels", "reliable"):
        fam = desc[key]
        print(f"{key} ({len(fam)}): " + " ".join("{" + ",".join(s) + "}" for s in fam))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="monoerasure", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("params", help="print code parameters for an access tree")
    s.add_argument("--tree", required=True)
    s.add_argument("--method", choices=METHODS, default="lp")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_params)

    s = sub.add_parser("build", help="build a code and write its manifest")
    s.add_argument("--tree", required=True)
    s.add_argument("--method", choices=METHODS, default="lp")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("check", help="verify a code against every minimal access set")
    s.add_argument("--code", required=True)
    s.add_argument("--tree")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("encode", help="split a file into per-node fragment files")
    s.add_argument("--code", required=True)
    s.add_argument("--file", required=True)
    s.add_argument("--out", required=True, help="directory for fragment files")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("decode", help="rebuild a file from fragment files")
    s.add_argument("--code", required=True)
    s.add_argument("--fragments", required=True, help="directory of fragment files")
    s.add_argument("--nodes", help="comma separated nodes to use (default: all present)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("sim", help="simulate dispersal and retrieval")
    s.add_argument("--scenario", required=True)
    s.add_argument("--transcript", help="write the JSON-lines transcript here")
    s.add_argument("--seeds", type=int, help="sweep this many consecutive seeds instead")
    s.set_defaults(func=cmd_sim)

    s = sub.add_parser("systems", help="list kernels and reliable sets of a quorum system")
    s.add_argument("--quorum", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_systems)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except Insufficient:
        print("insufficient")
        return EXIT_INSUFFICIENT
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (MecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - last resort
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
