"""
Command-line front end for delta-stone.

Builds towers, algebras, set maps and presentations from JSON, runs single
operations on them, and runs the full verification battery.

Usage:
    python cli.py [global flags] <command> ...
    python cli.py verify --suite witt --suite duality
    python cli.py explain duality.roundtrip
"""

import argparse
import json
import logging
import random
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from boolean_stone import (  # noqa: E402
    algebra_characters,
    double_dual_check,
    is_p_boolean,
    p_boolean_iso_check,
    spec_chars,
    stone_dual_of_set,
)
from condensed import (  # noqa: E402
    QuotientCondensedSet,
    RepresentablePresheaf,
    betti_delta_check,
    condensify,
    site_sheaf_check,
)
from config import MUTATIONS, SUITES, ConfigError, RunConfig, load_config  # noqa: E402
from delta_duality import (  # noqa: E402
    duality_roundtrip_check,
    p_complete_ff_check,
    phi_functor,
    witt_of_cont_iso,
)
from exact_algebra import CheckOutcome, ResidueRing, jsonable  # noqa: E402
from fixtures import (  # noqa: E402
    DATA_DIR,
    load_algebra,
    load_presentation,
    load_set_map,
    load_site,
    load_tower,
    read_json,
)
from profinite import (  # noqa: E402
    Tower,
    canonical_cantor,
    canonical_ntilde,
    check_sequential_surjectivity,
    label_from_json,
)
from verification import UnknownCheckError, explain, run_suite  # noqa: E402
from witt import WittRing, witt_polys  # noqa: E402

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


# ---------------------------------------------------------------------------
# Argument resolution
# ---------------------------------------------------------------------------


def resolve_tower(value: str, depth: int) -> Tower:
    """
    A tower from a canonical name, a shipped fixture name, a path or inline JSON.

    Args:
        value: "ntilde", "cantor", a file stem under data/fixtures/towers, a
            path to a tower JSON file, or inline tower JSON
        depth: Depth used for the canonical towers

    Returns:
        The tower
    """
    if value == "ntilde":
        return canonical_ntilde(depth)
    if value == "cantor":
        return canonical_cantor(depth)
    shipped = DATA_DIR / "towers" / f"{value}.json"
    if shipped.exists():
        return load_tower(shipped)
    return load_tower(value)


def resolve_presentation(value: str):
    shipped = DATA_DIR / "presentations" / f"{value}.json"
    return load_presentation(shipped if shipped.exists() else value)


def render(payload: Dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    lines = []
    for key in sorted(payload):
        value = payload[key]
        if not isinstance(value, str):
            value = json.dumps(value, sort_keys=True, ensure_ascii=False)
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def emit(payload: Dict[str, Any], config: RunConfig) -> None:
    text = render(payload, config.format)
    if config.output is None:
        sys.stdout.write(text)
        return
    try:
        config.output.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ConfigError(
            f"Cannot write output to {config.output}.\n"
            f"Error: {e}\n"
            f"Check that the directory exists and is writable."
        ) from e
    print(f"Output written to {config.output}")


def emit_outcome(
    operation: str, outcome: CheckOutcome, config: RunConfig, **extra: Any
) -> int:
    payload = {"operation": operation, "passed": outcome.passed, **extra}
    if outcome.witness is not None:
        payload["witness"] = outcome.witness
    emit(jsonable(payload), config)
    return EXIT_OK if outcome.passed else EXIT_FAILED


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _witt_ring(args, config: RunConfig, length: int) -> WittRing:
    if args.algebra:
        base = load_algebra(args.algebra)
    else:
        base = ResidueRing(config.p, args.base_precision)
    return WittRing(base, length)


def cmd_witt(args, config: RunConfig) -> int:
    if args.action == "polys":
        polys = witt_polys(config.p, args.n)
        return emit_outcome(
            "witt polys", polys.check_ghost_identities(), config, **polys.to_json()
        )
    if args.a is None:
        raise ConfigError(f"witt {args.action} needs a Witt vector: pass --a")
    a_data = read_json(args.a)
    ring = _witt_ring(args, config, len(a_data))
    a = ring.element_from_json(a_data)
    if args.action == "ghost":
        payload = {
            "ring": ring.describe(),
            "vector": ring.element_to_json(a),
            "ghost": [ring.base.element_to_json(w) for w in ring.ghost(a)],
        }
        emit(jsonable(payload), config)
        return EXIT_OK
    if args.b is None:
        raise ConfigError(f"witt {args.action} needs a second vector: pass --b")
    b = ring.element_from_json(read_json(args.b))
    result = ring.add(a, b) if args.action == "add" else ring.mul(a, b)
    emit(
        {
            "ring": ring.describe(),
            "operation": args.action,
            "result": ring.element_to_json(result),
        },
        config,
    )
    return EXIT_OK


def cmd_stone(args, config: RunConfig) -> int:
    if args.action == "dual":
        points = [label_from_json(x) for x in read_json(args.points)]
        algebra = stone_dual_of_set(points, config.p).algebra
        characters = spec_chars(algebra).points
        return emit_outcome(
            "stone dual",
            p_boolean_iso_check(algebra),
            config,
            points=points,
            characters=[list(chi) for chi in characters],
        )
    if args.action == "algebra":
        algebra = load_algebra(args.algebra)
        if not is_p_boolean(algebra):
            characters = algebra_characters(algebra).points
            emit(
                jsonable(
                    {
                        "algebra": algebra.describe(),
                        "p_boolean": False,
                        "characters": [list(chi) for chi in characters],
                    }
                ),
                config,
            )
            return EXIT_OK
        return emit_outcome(
            "stone algebra",
            p_boolean_iso_check(algebra),
            config,
            algebra=algebra.describe(),
            p_boolean=True,
        )
    ring_map = load_set_map(args.map)
    outcome = double_dual_check(
        ring_map.set_map(),
        ring_map.source.domain,
        ring_map.target.domain,
        ring_map.source.p,
    )
    return emit_outcome("stone double-dual", outcome, config)


def cmd_profinite(args, config: RunConfig) -> int:
    tower = resolve_tower(args.tower, config.depth)
    if args.action == "show":
        payload = tower.to_json()
        payload["level_sizes"] = [len(level) for level in tower.levels]
        payload["surjective_transitions"] = [
            tower.is_surjective_transition(n) for n in range(tower.depth)
        ]
        emit(payload, config)
        return EXIT_OK
    return emit_outcome(
        "profinite surjectivity", check_sequential_surjectivity(tower), config
    )


def cmd_duality(args, config: RunConfig) -> int:
    tower = resolve_tower(args.tower, config.depth)
    m = args.m or config.precision
    if args.action == "roundtrip":
        outcome = duality_roundtrip_check(tower, args.level, m, config.p)
        ring = phi_functor(tower, args.level, m, config.p)
        return emit_outcome(
            "duality roundtrip", outcome, config, ring=ring.describe()
        )
    outcome = witt_of_cont_iso(
        tower, args.level, m, config.p, random.Random(config.seed), config.samples
    )
    return emit_outcome("duality witt-cont", outcome, config)


def cmd_flatness(args, config: RunConfig) -> int:
    ring_map = load_set_map(args.map)
    witness = p_complete_ff_check(ring_map)
    outcome = (
        CheckOutcome.ok(**witness.to_json())
        if witness.consistent
        else CheckOutcome.fail(**witness.to_json())
    )
    return emit_outcome(
        "flatness check",
        outcome,
        config,
        faithfully_flat=witness.faithfully_flat,
    )


def cmd_condensed(args, config: RunConfig) -> int:
    if args.action == "sheaf-check":
        site = load_site(args.site or DATA_DIR / "site.json")
        if args.presentation:
            presentation = resolve_presentation(args.presentation)
            presheaf = condensify(QuotientCondensedSet(presentation, args.level))
        else:
            points = [label_from_json(x) for x in read_json(args.points or "[0, 1]")]
            presheaf = RepresentablePresheaf(points)
        return emit_outcome(
            "condensed sheaf-check",
            site_sheaf_check(presheaf, site),
            config,
            presheaf=presheaf.name,
        )
    tower = resolve_tower(args.tower, config.depth)
    ring_tower = resolve_tower(args.ring_tower, config.depth)
    ring = phi_functor(ring_tower, args.ring_level, args.m or 2, config.p)
    return emit_outcome(
        "condensed betti",
        betti_delta_check(tower, args.level, ring),
        config,
        ring=ring.describe(),
    )


def cmd_verify(args, config: RunConfig) -> int:
    report = run_suite(config)
    if config.output is None:
        sys.stdout.write(report.render(config.format))
    else:
        status = "PASS" if report.passed else "FAIL"
        print(f"{status}: report written to {config.output}")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_explain(args, config: RunConfig) -> int:
    sys.stdout.write(explain(args.check_id))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delta-stone",
        description="Finite-level verification of δ-Stone duality.",
    )
    parser.add_argument("--p", type=int, help="Prime p (default 2)")
    parser.add_argument("--precision", type=int, help="Working precision m")
    parser.add_argument("--depth", type=int, help="Tower truncation depth")
    parser.add_argument("--seed", type=int, help="Seed for sampled checks")
    parser.add_argument("--out", type=Path, help="Write output to this file")
    parser.add_argument("--format", choices=["json", "text"])
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--config", type=Path, help="JSON configuration file")
    commands = parser.add_subparsers(dest="command", required=True)

    witt = commands.add_parser("witt", help="Witt vector arithmetic")
    witt.add_argument("action", choices=["ghost", "add", "mul", "polys"])
    witt.add_argument("--a", help="Witt vector as a JSON list of components")
    witt.add_argument("--b", help="Second Witt vector for add and mul")
    witt.add_argument("--n", type=int, default=3, help="Length for polys")
    witt.add_argument(
        "--base-precision", type=int, default=1, help="Base ring Z/p^k (default k=1)"
    )
    witt.add_argument("--algebra", help="F_p-algebra JSON to use as the base ring")
    witt.set_defaults(handler=cmd_witt)

    stone = commands.add_parser("stone", help="Finite Stone duality")
    stone.add_argument("action", choices=["dual", "algebra", "double-dual"])
    stone.add_argument("--points", default="[0, 1]", help="Finite set as JSON list")
    stone.add_argument("--algebra", help="Algebra JSON {p, dim, unit, sc}")
    stone.add_argument("--map", help="Set map JSON {source, target, map}")
    stone.set_defaults(handler=cmd_stone)

    profinite = commands.add_parser("profinite", help="Towers of finite sets")
    profinite.add_argument("action", choices=["show", "surjectivity"])
    profinite.add_argument("--tower", required=True, help="Tower name, path or JSON")
    profinite.set_defaults(handler=cmd_profinite)

    duality = commands.add_parser("duality", help="δ-Stone duality at a level")
    duality.add_argument("action", choices=["roundtrip", "witt-cont"])
    duality.add_argument("--tower", required=True, help="Tower name, path or JSON")
    duality.add_argument("--level", type=int, default=0)
    duality.add_argument("--m", type=int, help="Precision (default --precision)")
    duality.set_defaults(handler=cmd_duality)

    flatness = commands.add_parser("flatness", help="p-complete faithful flatness")
    flatness.add_argument("action", choices=["check"])
    flatness.add_argument("--map", required=True, help="Set map JSON")
    flatness.set_defaults(handler=cmd_flatness)

    condensed = commands.add_parser("condensed", help="Sheaves on the finite site")
    condensed.add_argument("action", choices=["sheaf-check", "betti"])
    condensed.add_argument("--site", help="Site JSON (default: shipped site)")
    condensed.add_argument("--presentation", help="Presentation name, path or JSON")
    condensed.add_argument("--points", help="Finite set K for Hom(-, K)")
    condensed.add_argument("--tower", default="ntilde", help="Tower for K")
    condensed.add_argument("--level", type=int, default=0)
    condensed.add_argument("--ring-tower", default="cantor", help="Tower for A")
    condensed.add_argument("--ring-level", type=int, default=0)
    condensed.add_argument("--m", type=int, help="Precision of A (default 2)")
    condensed.set_defaults(handler=cmd_condensed)

    verify = commands.add_parser("verify", help="Run the verification battery")
    verify.add_argument("--suite", action="append", choices=SUITES)
    verify.add_argument("--mutation", action="append", choices=MUTATIONS)
    verify.add_argument("--workers", type=int)
    verify.add_argument("--timings", action="store_true", default=None)
    verify.set_defaults(handler=cmd_verify)

    explain_cmd = commands.add_parser("explain", help="Describe a check")
    explain_cmd.add_argument("check_id")
    explain_cmd.set_defaults(handler=cmd_explain)
    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """CLI flags that were actually given, as RunConfig fields."""
    return {
        "p": args.p,
        "precision": args.precision,
        "depth": args.depth,
        "seed": args.seed,
        "output": args.out,
        "format": args.format,
        "log_level": args.log_level,
        "suites": getattr(args, "suite", None),
        "mutations": getattr(args, "mutation", None),
        "workers": getattr(args, "workers", None),
        "include_timings": getattr(args, "timings", None),
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, overrides=config_overrides(args))
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(
        level=config.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.debug("Running %s", args.command)
    try:
        return args.handler(args, config)
    except UnknownCheckError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, ArithmeticError, KeyError) as e:
        first_line = str(e).splitlines()[0] if str(e) else type(e).__name__
        print(f"error: {type(e).__name__}: {first_line}", file=sys.stderr)
        logger.debug("Full error", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
