"""Command-line batch verifier: ``fuzzynf stratify|check|extract``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

from .checker import build_and_check, check_structure, growing_fragments
from .crisp import extract, verify_nf
from .hierarchy import build_vn
from .model import dump_structure, load_structure
from .stratify import is_stratified
from .syntax import TheoryFragment, language_of, parse_theory_file

OUT_DIR_ENV = "FUZZYNF_OUT_DIR"
STRATIFY_SCHEMA = "fuzzynf.stratify-report/1"
CHECK_RUN_SCHEMA = "fuzzynf.check-run/1"
EXTRACT_SCHEMA = "fuzzynf.extract-report/1"

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def default_corpus_text() -> str:
    return files("fuzzynf").joinpath("data/default.theory").read_text(encoding="utf-8")


@dataclass(frozen=True)
class RunConfig:
    command: str
    level: int = 3
    grid: int = 4
    corpus: Path | None = None
    out: Path | None = None
    format: str = "text"
    grow: bool = False
    allow_large: bool = False
    fail_fast: bool = False
    structure: Path | None = None
    dump: Path | None = None

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> RunConfig:
        out = ns.out
        env_dir = os.environ.get(OUT_DIR_ENV)
        if out is None and env_dir:
            suffix = "json" if ns.format == "structured" else "txt"
            out = Path(env_dir) / f"{ns.command}.{suffix}"
        return cls(
            command=ns.command,
            level=ns.level,
            grid=ns.grid,
            corpus=ns.corpus,
            out=out,
            format=ns.format,
            grow=getattr(ns, "grow", False),
            allow_large=ns.allow_large,
            fail_fast=ns.fail_fast,
            structure=getattr(ns, "structure", None),
            dump=getattr(ns, "dump", None),
        )

    def load_corpus(self) -> TheoryFragment:
        if self.corpus is None:
            return parse_theory_file(default_corpus_text(), "default")
        return parse_theory_file(self.corpus.read_text(encoding="utf-8"), self.corpus.stem)


@dataclass
class Outcome:
    ok: bool
    document: dict
    text: str


def cmd_stratify(cfg: RunConfig) -> Outcome:
    frag = cfg.load_corpus()
    rows, lines = [], []
    for e in frag.entries:
        if e.kind == "axiom":
            continue
        res = is_stratified(e.formula)
        rows.append({"label": e.label, "kind": e.kind, "language": language_of(e.formula), **res.to_json()})
        if res:
            typing = ", ".join(f"{k}:{v}" for k, v in sorted(res.typing.by_name().items()))
            lines.append(f"{e.label:<20} stratified    {{{typing}}}")
        else:
            lines.append(f"{e.label:<20} UNSTRATIFIED  {res.certificate.describe()}")
            if cfg.fail_fast:
                break
    ok = all(r["stratified"] for r in rows)
    doc = {"schema": STRATIFY_SCHEMA, "corpus": frag.name, "formulas": rows, "result": _word(ok)}
    text = "\n".join([f"stratification of {frag.name}: {len(rows)} formula(s)", *lines])
    return Outcome(ok, doc, text)


def cmd_check(cfg: RunConfig) -> Outcome:
    frag = cfg.load_corpus()
    if cfg.structure is not None:
        reports = [check_structure(_load_dump(cfg), frag)]
    elif cfg.grow:
        reports = growing_fragments(frag, cfg.level, cfg.grid, cfg.allow_large)
    else:
        st, report = build_and_check(frag, cfg.level, cfg.grid, cfg.allow_large)
        reports = [report]
        if cfg.dump is not None and st is not None:
            cfg.dump.write_text(dump_structure(st), encoding="utf-8")
    ok = all(r.holds for r in reports)
    doc = {
        "schema": CHECK_RUN_SCHEMA,
        "grow": cfg.grow,
        "reports": [r.to_json() for r in reports],
        "result": _word(ok),
    }
    return Outcome(ok, doc, "\n".join(r.to_text() for r in reports))


def cmd_extract(cfg: RunConfig) -> Outcome:
    frag = cfg.load_corpus()
    if cfg.structure is not None:
        st = _load_dump(cfg)
        check = check_structure(st, frag)
    else:
        st, check = build_and_check(frag, cfg.level, cfg.grid, cfg.allow_large)
    doc = {"schema": EXTRACT_SCHEMA, "check": check.to_json(), "nf": None}
    parts = [check.to_text()]
    if st is None or (cfg.fail_fast and not check.holds):
        doc["result"] = _word(False)
        parts.append("extraction skipped: the model does not pass its checks")
        return Outcome(False, doc, "\n".join(parts))
    nf = verify_nf(extract(st), list(frag.classicals))
    ok = check.holds and nf.holds
    doc["nf"] = nf.to_json()
    doc["result"] = _word(ok)
    parts.append(nf.to_text())
    return Outcome(ok, doc, "\n".join(parts))


COMMANDS = {"stratify": cmd_stratify, "check": cmd_check, "extract": cmd_extract}


def _load_dump(cfg: RunConfig):
    return load_structure(cfg.structure.read_text(encoding="utf-8"), cfg.allow_large)


def _word(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def render(outcome: Outcome, fmt: str) -> str:
    if fmt == "structured":
        return json.dumps(outcome.document, indent=2, sort_keys=True) + "\n"
    return outcome.text + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--level", type=int, default=3, help="cumulative hierarchy level n (default 3)")
    common.add_argument("--grid", type=int, default=4, help="degree grid resolution k (default 4)")
    common.add_argument("--corpus", type=Path, help="theory file (default: the shipped corpus)")
    common.add_argument("--out", type=Path, help=f"report file (default: ${OUT_DIR_ENV}/<command>.<ext> if set)")
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--allow-large", action="store_true", help="permit level 5 (65536 crisp sets)")
    common.add_argument("--fail-fast", action="store_true", help="stop at the first failure")

    parser = argparse.ArgumentParser(
        prog="fuzzynf", description="Batch verifier for finite models of restricted fuzzy New Foundations."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("stratify", parents=[common], help="decide stratification of every corpus formula")
    check = sub.add_parser("check", parents=[common], help="build M_n and verify the axioms")
    check.add_argument("--grow", action="store_true", help="check every prefix of the corpus in turn")
    check.add_argument("--structure", type=Path, help="check a dumped structure instead of building one")
    check.add_argument("--dump", type=Path, help="also write the built structure to this file")
    ext = sub.add_parser("extract", parents=[common], help="extract and verify the crisp quotient")
    ext.add_argument("--structure", type=Path, help="extract from a dumped structure")
    return parser


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig.from_args(ns)
    try:
        if cfg.level < 1 or cfg.grid < 1:
            raise ValueError("--level and --grid must be at least 1")
        build_vn(cfg.level, allow_large=cfg.allow_large)
        outcome = COMMANDS[cfg.command](cfg)
    except (ValueError, OSError) as exc:  # parse, sort, cap and model errors are all ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        print("RESULT: FAIL")
        return EXIT_ERROR
    body = render(outcome, cfg.format)
    summary = f"RESULT: {_word(outcome.ok)}\n"
    if cfg.out is not None:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(body if cfg.format == "structured" else body + summary, encoding="utf-8")
    sys.stdout.write(body + summary)
    return EXIT_PASS if outcome.ok else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
