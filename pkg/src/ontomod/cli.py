"""Command-line driver: the end-to-end pipeline and one subcommand per stage."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .align import DEFAULT_THRESHOLD, InvalidThreshold, MappingSet, check_threshold, compute_mappings
from .extract import DEFAULT_MAX_ROUNDS, ENRICH_FIELDS, MaxRoundsExceeded, extract_module, order_audit, run_fixpoint
from .integrate import build_bridge, merge, pairwise_merges, read_bridge, read_merged
from .matching import MATCH_MODES, EmptyTermSet, match_terms, validate_seed_terms
from .model import EntityId, Ontology
from .obo import OboError, parse_obo, read_module, serialize_obo
from .satcheck import (
    RepairIncomplete,
    check_pairs,
    explain,
    explain_all,
    explanations_json,
    pairs_tsv,
    parse_plan,
    repair_merged,
    unsat_classes,
    unsat_report,
)

log = logging.getLogger("ontomod")

EXIT_OK, EXIT_ERROR, EXIT_CLASH = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    seed_label: str = "seed"
    seed_terms: list[str] = field(default_factory=list)
    ontologies: list[tuple[str, Path]] = field(default_factory=list)
    threshold: float = DEFAULT_THRESHOLD
    match_mode: str = "substring"
    enrich_fields: tuple[str, ...] = ("id", "name")
    max_rounds: int = DEFAULT_MAX_ROUNDS
    output_dir: Path = Path("out")
    order_audit: bool = False
    auto_repair: bool = False
    use_def: bool = True

    def validate(self) -> None:
        validate_seed_terms(self.seed_terms)
        if not self.ontologies:
            raise ConfigError("no ontologies configured")
        ids = [i for i, _ in self.ontologies]
        paths = [p.resolve() for _, p in self.ontologies]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate ontology ids: {ids}")
        if len(set(paths)) != len(paths):
            raise ConfigError("ontology paths must be distinct")
        check_threshold(self.threshold)
        if self.match_mode not in MATCH_MODES:
            raise ConfigError(f"match mode must be one of {MATCH_MODES}")
        bad = set(self.enrich_fields) - set(ENRICH_FIELDS)
        if bad or not self.enrich_fields:
            raise ConfigError(f"enrich fields must be drawn from {ENRICH_FIELDS}")
        if self.max_rounds < 1:
            raise ConfigError("max rounds must be >= 1")
        if not self.seed_label or "/" in self.seed_label:
            raise ConfigError(f"bad seed label {self.seed_label!r}")


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_ontology_arg(value: str, base: Path | None = None) -> tuple[str, Path]:
    """``id=path`` or bare ``path`` (id is the file stem)."""
    oid, sep, path_text = value.partition("=")
    if not sep:
        path_text, oid = value, Path(value).stem
    path = Path(path_text.strip())
    if base is not None and not path.is_absolute():
        path = base / path
    oid = oid.strip()
    if not oid:
        raise ValueError(f"empty ontology id in {value!r}")
    return oid, path


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def load_config(path: Path) -> PipelineConfig:
    """Read a flat ``key = value`` file; ``#`` starts a comment line."""
    cfg = PipelineConfig()
    base = path.parent
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        try:
            if key == "seed_label":
                cfg.seed_label = value
            elif key in ("seed_terms", "seeds", "seed"):
                cfg.seed_terms.extend(_split_list(value))
            elif key == "ontology":
                cfg.ontologies.append(parse_ontology_arg(value, base))
            elif key == "threshold":
                cfg.threshold = float(value)
            elif key == "match_mode":
                cfg.match_mode = value
            elif key == "enrich_fields":
                cfg.enrich_fields = tuple(_split_list(value))
            elif key == "max_rounds":
                cfg.max_rounds = int(value)
            elif key == "output_dir":
                cfg.output_dir = base / value
            elif key == "order_audit":
                cfg.order_audit = _bool(value)
            elif key == "auto_repair":
                cfg.auto_repair = _bool(value)
            elif key == "def_similarity":
                cfg.use_def = _bool(value)
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return cfg


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(Path(args.config)) if args.config else PipelineConfig()
    updates: dict = {}
    if args.seed:
        updates["seed_terms"] = [t for s in args.seed for t in _split_list(s)]
    if args.seed_label:
        updates["seed_label"] = args.seed_label
    if args.ontology:
        updates["ontologies"] = [parse_ontology_arg(v) for v in args.ontology]
    if args.threshold is not None:
        updates["threshold"] = args.threshold
    if args.match_mode:
        updates["match_mode"] = args.match_mode
    if args.enrich_fields:
        updates["enrich_fields"] = tuple(_split_list(args.enrich_fields))
    if args.max_rounds is not None:
        updates["max_rounds"] = args.max_rounds
    if args.out:
        updates["output_dir"] = Path(args.out)
    if getattr(args, "order_audit", False):
        updates["order_audit"] = True
    if getattr(args, "auto_repair", False):
        updates["auto_repair"] = True
    if args.no_def_similarity:
        updates["use_def"] = False
    cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg


# -- helpers ----------------------------------------------------------------------


def _read(path: Path | str) -> str:
    return Path(path).read_text(encoding="utf-8", errors="replace")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _emit(text: str, out: str | None) -> None:
    if out:
        _write(Path(out), text)
    else:
        sys.stdout.write(text)


def load_ontology(oid: str, path: Path) -> Ontology:
    try:
        o = parse_obo(_read(path), oid)
    except OboError as exc:
        raise OboError(f"{path}: {exc}") from exc
    for w in o.warnings:
        log.debug("%s: %s", path, w)
    if o.warnings:
        log.info("%s: %d parse warning(s)", path, len(o.warnings))
    return o


def _modules_from(paths: Sequence[str]):
    return [read_module(_read(p)) for p in paths]


# -- pipeline ---------------------------------------------------------------------


def run_pipeline(cfg: PipelineConfig) -> int:
    ontologies = [load_ontology(oid, path) for oid, path in cfg.ontologies]
    seeds = validate_seed_terms(cfg.seed_terms)
    out = cfg.output_dir
    label = cfg.seed_label

    fp = run_fixpoint(
        ontologies,
        seeds,
        cfg.max_rounds,
        seed_label=label,
        match_mode=cfg.match_mode,
        enrich_fields=cfg.enrich_fields,
    )
    for m in fp.modules:
        _write(out / m.filename, serialize_obo(m))
    _write(out / f"{label}_trace.tsv", fp.trace.to_tsv())
    if cfg.order_audit:
        rows = order_audit(
            ontologies, seeds, cfg.max_rounds,
            seed_label=label, match_mode=cfg.match_mode, enrich_fields=cfg.enrich_fields,
        )
        lines = ["ontology\tverdict\taxiomsConfigured\taxiomsReversed"]
        lines += ["\t".join(map(str, r)) for r in rows]
        _write(out / f"{label}_order_audit.tsv", "\n".join(lines) + "\n")

    maps = compute_mappings(fp.modules, cfg.threshold, use_def=cfg.use_def)
    _write(out / f"{label}_mappings.json", maps.to_json())
    _write(out / f"{label}_mappings.tsv", maps.to_tsv())

    bridge = build_bridge(fp.modules, maps)
    _write(out / f"{label}_bridge.obo", serialize_obo(bridge))
    merged = merge(fp.modules, bridge, f"{label}_merged")
    _write(out / f"{label}_merged.obo", serialize_obo(merged))
    _write(out / f"{label}_conflicts.tsv", merged.conflicts_tsv())

    if len(fp.modules) >= 2:
        _write(out / f"{label}_pairs.tsv", pairs_tsv(check_pairs(pairwise_merges(fp.modules, bridge))))

    explanations = explain_all(merged)
    _write(out / f"{label}_unsat.tsv", unsat_report(merged, explanations))
    _write(out / f"{label}_explanations.json", explanations_json(explanations))
    log.info("%d mapping(s), %d unsatisfiable class(es)", len(maps), len(unsat_classes(merged)))

    try:
        plan = repair_merged(merged)
    except RepairIncomplete as exc:
        _write(out / f"{label}_repair.txt", exc.plan.to_text())
        log.error("repair incomplete: %s", exc)
        return EXIT_CLASH
    _write(out / f"{label}_repair.txt", plan.to_text())
    if cfg.auto_repair:
        _write(out / f"{label}_repaired.obo", serialize_obo(merged.without(plan.removals)))
    return EXIT_OK


# -- subcommands ----------------------------------------------------------------------


def cmd_pipeline(args) -> int:
    return run_pipeline(config_from_args(args))


def cmd_fixpoint(args) -> int:
    cfg = config_from_args(args)
    ontologies = [load_ontology(oid, path) for oid, path in cfg.ontologies]
    fp = run_fixpoint(
        ontologies,
        validate_seed_terms(cfg.seed_terms),
        cfg.max_rounds,
        seed_label=cfg.seed_label,
        match_mode=cfg.match_mode,
        enrich_fields=cfg.enrich_fields,
    )
    for m in fp.modules:
        _write(cfg.output_dir / m.filename, serialize_obo(m))
    _write(cfg.output_dir / f"{cfg.seed_label}_trace.tsv", fp.trace.to_tsv())
    return EXIT_OK


def cmd_parse(args) -> int:
    oid, path = parse_ontology_arg(args.input)
    o = load_ontology(args.id or oid, path)
    for w in o.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(serialize_obo(o), args.out)
    return EXIT_OK


def cmd_match(args) -> int:
    oid, path = parse_ontology_arg(args.input)
    o = load_ontology(args.id or oid, path)
    report = match_terms(o, validate_seed_terms(args.seed), args.match_mode)
    _emit(report.to_tsv(), args.out)
    return EXIT_OK


def cmd_extract(args) -> int:
    oid, path = parse_ontology_arg(args.input)
    o = load_ontology(args.id or oid, path)
    seed = set(match_terms(o, validate_seed_terms(args.seed), args.match_mode).matched)
    seed.update(EntityId.parse(s) for s in args.entity or ())
    m = extract_module(o, seed, args.seed_label)
    target = Path(args.out) / m.filename if args.out else None
    _emit(serialize_obo(m), str(target) if target else None)
    return EXIT_OK


def cmd_map(args) -> int:
    check_threshold(args.threshold)
    maps = compute_mappings(_modules_from(args.modules), args.threshold, use_def=not args.no_def_similarity)
    _emit(maps.to_json(), args.out)
    if args.tsv:
        _write(Path(args.tsv), maps.to_tsv())
    return EXIT_OK


def cmd_bridge(args) -> int:
    maps = MappingSet.from_json(_read(args.mappings))
    _emit(serialize_obo(build_bridge(_modules_from(args.modules), maps)), args.out)
    return EXIT_OK


def cmd_merge(args) -> int:
    bridge = read_bridge(_read(args.bridge)) if args.bridge else None
    merged = merge(_modules_from(args.modules), bridge, args.id)
    _emit(serialize_obo(merged), args.out)
    if args.conflicts:
        _write(Path(args.conflicts), merged.conflicts_tsv())
    return EXIT_OK


def cmd_check(args) -> int:
    merged = read_merged(_read(args.merged))
    explanations = explain_all(merged)
    _emit(unsat_report(merged, explanations), args.out)
    return EXIT_CLASH if explanations else EXIT_OK


def cmd_explain(args) -> int:
    merged = read_merged(_read(args.merged))
    if args.entity:
        explanations = [ex for e in args.entity for ex in explain(merged, EntityId.parse(e))]
    else:
        explanations = explain_all(merged)
    _emit(explanations_json(explanations), args.out)
    return EXIT_OK


def cmd_repair(args) -> int:
    merged = read_merged(_read(args.merged))
    try:
        plan = repair_merged(merged, args.max_iterations)
    except RepairIncomplete as exc:
        _emit(exc.plan.to_text(), args.out)
        log.error("%s", exc)
        return EXIT_CLASH
    _emit(plan.to_text(), args.out)
    return EXIT_OK


def cmd_apply_repair(args) -> int:
    merged = read_merged(_read(args.merged))
    repaired = merged.without(parse_plan(_read(args.plan)))
    _emit(serialize_obo(repaired), args.out)
    remaining = unsat_classes(repaired)
    if remaining:
        log.error("%d class(es) still unsatisfiable", len(remaining))
        return EXIT_CLASH
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def _add_pipeline_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--seed", action="append", help="seed term (repeatable, or comma-separated)")
    p.add_argument("--seed-label", help="label used in output file names")
    p.add_argument("--ontology", action="append", metavar="ID=PATH", help="source ontology (repeatable)")
    p.add_argument("--threshold", type=float, help=f"mapping threshold (default {DEFAULT_THRESHOLD})")
    p.add_argument("--match-mode", choices=MATCH_MODES)
    p.add_argument("--enrich-fields", help="comma list from id,name,synonym")
    p.add_argument("--max-rounds", type=int)
    p.add_argument("--no-def-similarity", action="store_true")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ontomod", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    _add_pipeline_options(p)
    p.add_argument("--order-audit", action="store_true", help="also run in reversed order and compare")
    p.add_argument("--auto-repair", action="store_true", help="write the repaired merge too")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("fixpoint", help="extract modules to a signature fixpoint")
    _add_pipeline_options(p)
    p.set_defaults(func=cmd_fixpoint)

    def single_input(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", metavar="[ID=]PATH")
        p.add_argument("--id", help="ontology id (default: file stem)")
        p.add_argument("--out")
        return p

    p = single_input("parse", "parse and re-serialize an OBO file")
    p.set_defaults(func=cmd_parse)

    p = single_input("match", "list seed-term hits as TSV")
    p.add_argument("--seed", action="append", required=True)
    p.add_argument("--match-mode", choices=MATCH_MODES, default="substring")
    p.set_defaults(func=cmd_match)

    p = single_input("extract", "extract one module (--out is a directory)")
    p.add_argument("--seed", action="append", required=True)
    p.add_argument("--entity", action="append", help="extra seed entity id")
    p.add_argument("--seed-label", default="seed")
    p.add_argument("--match-mode", choices=MATCH_MODES, default="substring")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("map", help="align module files")
    p.add_argument("modules", nargs="+")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--no-def-similarity", action="store_true")
    p.add_argument("--out")
    p.add_argument("--tsv", help="also write the mappings as TSV here")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("bridge", help="bridge document from modules and mappings")
    p.add_argument("modules", nargs="+")
    p.add_argument("--mappings", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bridge)

    p = sub.add_parser("merge", help="materialize modules plus bridge")
    p.add_argument("modules", nargs="+")
    p.add_argument("--bridge")
    p.add_argument("--id", default="merged")
    p.add_argument("--conflicts")
    p.add_argument("--out")
    p.set_defaults(func=cmd_merge)

    for name, func, help_text in (
        ("check", cmd_check, "report unsatisfiable classes (exit 2 if any)"),
        ("explain", cmd_explain, "minimal explanations as JSON"),
        ("repair", cmd_repair, "write a verified repair plan"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("merged")
        p.add_argument("--out")
        p.set_defaults(func=func)
    sub.choices["explain"].add_argument("--entity", action="append")
    sub.choices["repair"].add_argument("--max-iterations", type=int, default=8)

    p = sub.add_parser("apply-repair", help="apply a repair plan and re-check")
    p.add_argument("merged")
    p.add_argument("plan")
    p.add_argument("--out")
    p.set_defaults(func=cmd_apply_repair)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OboError, EmptyTermSet, InvalidThreshold, MaxRoundsExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
