"""Command line entry point: ``sumproduct {certify,experiment,probe-sharpness,vinh-check}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .graph import IMPLICIT, MATERIALIZED
from .harness import sharpness_probe, vinh_field_check
from .rings import RingError, parse_ring
from .runner import ConfigError, certificate_for, env_caps, parse_config, run
from .sets import RANDOM_ELEMENTS, set_family


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_certify(args) -> int:
    ring = parse_ring(args.ring)
    max_n = args.max_n or env_caps()["max_n"]
    if args.mode == MATERIALIZED and ring.order**2 > max_n:
        print(f"error: n={ring.order ** 2} exceeds --max-n={max_n}; use --mode implicit", file=sys.stderr)
        return 2
    # implicit mode skips the spectrum even when it would fit
    cert = certificate_for(ring, max_n if args.mode == MATERIALIZED else 0)
    _emit(cert, args.out)
    return 0 if cert.get("bound_holds") in (True, None) else 1


def cmd_experiment(args) -> int:
    text = Path(args.config).read_text()
    cfg = parse_config(text, {"max_n": args.max_n, "seed": args.seed, "jobs": args.jobs, "out": args.out})
    manifest = run(cfg)
    print(
        f"{len(manifest.instances)} instances, {manifest.chain_failures} chain failures, "
        f"{manifest.errors} errors; files: {', '.join(manifest.files)}"
    )
    return manifest.exit_code


def cmd_probe(args) -> int:
    ring = parse_ring(args.ring)
    reports = [sharpness_probe(ring, n, args.base).to_json() for n in args.length]
    _emit(reports if len(reports) > 1 else reports[0], args.out)
    return 0


def cmd_vinh(args) -> int:
    ring = parse_ring(args.ring)
    results = []
    for i in range(args.count):
        A = set_family(ring, RANDOM_ELEMENTS, args.size, seed=args.seed + i)
        res = vinh_field_check(A)
        results.append({"seed": args.seed + i, **res.__dict__})
    _emit({"ring": ring.label, "violations": sum(not r["holds"] for r in results), "checks": results}, args.out)
    return 0 if all(r["holds"] for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sumproduct", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="spectral certificate of the sum-product graph")
    p.add_argument("--ring", required=True, help="zpr:<p>,<r> or polyq:<p>,<r>,<f coeffs>")
    p.add_argument("--mode", choices=(IMPLICIT, MATERIALIZED), default=MATERIALIZED)
    p.add_argument("--out")
    p.add_argument("--max-n", type=int)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("experiment", help="run a JSON experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, help="replace the config's seeds")
    p.add_argument("--jobs", type=int)
    p.add_argument("--max-n", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("probe-sharpness", help="xy(x+y) on geometric progressions over Z/p")
    p.add_argument("--ring", required=True)
    p.add_argument("--length", type=int, nargs="+", required=True)
    p.add_argument("--base", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("vinh-check", help="field sum-product inequality on random subsets")
    p.add_argument("--ring", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_vinh)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, RingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
