"""Command-line front door.

Four subcommands: ``run`` executes a protocol and prints the verification
report, ``oracle`` prints per-branch gadget soundness tables, ``attack``
prints escape / tamper analyses, and ``blindness`` runs the leakage audits.
All reports are JSON on standard output with sorted keys, so identical
inputs give identical bytes. Exit codes: 0 accepted / all checks pass,
2 rejected / check failed, 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone

from . import __version__, rng
from .adversary import (
    escape_bound,
    escape_counts,
    simulate_escape,
    simulate_tamper_acceptance,
    tamper_acceptance_exact,
)
from .blindness import (
    audit_gadget_view_tv,
    audit_no_signaling,
    audit_probe_gram,
    audit_theta_uniformity,
    audit_transcript_tv,
)
from .oracle import GADGET_FIDELITY_ATOL, ORACLE_GADGETS, branch_table, table_passes
from .protocols import (
    AdversaryConfig,
    HONEST,
    RunManifest,
    config_from_dict,
    run_protocol1,
    run_protocol2,
    run_sueki,
)

RUNNERS = {"sueki": run_sueki, "p1": run_protocol1, "p2": run_protocol2}

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECT = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; here 2 means 'rejected', so remap."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _jsonable(value):
    """Recursively coerce report values into plain JSON types."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, float):
        return value
    if hasattr(value, "item"):  # numpy scalar
        return value.item()
    return str(value)


def parse_adversary(spec: str) -> AdversaryConfig:
    """Parse ``none`` | ``pauli:a,b,c`` | ``tamper:rate``."""
    if spec in ("", "none"):
        return HONEST
    kind, sep, params = spec.partition(":")
    if kind == "pauli" and sep:
        parts = params.split(",")
        if len(parts) != 3:
            raise ValueError(f"pauli spec needs three counts, got {spec!r}")
        a, b, c = (int(x) for x in parts)
        return AdversaryConfig(kind="random_pauli", pauli_counts=(a, b, c))
    if kind == "tamper" and sep:
        return AdversaryConfig(kind="trap_tamper", tamper_rate=float(params))
    raise ValueError(f"bad adversary spec {spec!r} (none | pauli:a,b,c | tamper:rate)")


# ---------------------------------------------------------------------------
# run


def _add_run_parser(sub) -> None:
    p = sub.add_parser("run", help="execute one protocol run and print the report")
    p.add_argument("--protocol", choices=("sueki", "p1", "p2"))
    p.add_argument("--qubits", type=int, help="register width N")
    p.add_argument("--depth", type=int, help="number of gate layers")
    p.add_argument("--traps", type=int, help="trap count (p2 only; p1 fixes 2N/3)")
    p.add_argument("--seed", type=int, help="root seed for all randomness")
    p.add_argument("--config", help="JSON config or manifest file; flags override")
    p.add_argument("--adversary", default=None, help="none | pauli:a,b,c | tamper:rate")
    p.add_argument("--manifest-out", help="write a rerunnable manifest JSON here")
    p.add_argument("--transcript-out", help="write the transcript JSON lines here")


def cmd_run(args) -> int:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        base = data.get("config", data)
    if args.protocol is not None:
        base["protocol"] = args.protocol
    if args.qubits is not None:
        base["num_register_qubits"] = args.qubits
        base.pop("num_qubits", None)
    if args.depth is not None:
        base["depth"] = args.depth
    if args.traps is not None:
        base["trap_count"] = args.traps
    if args.seed is not None:
        base["seed"] = args.seed
    if args.adversary is not None:
        adv = parse_adversary(args.adversary)
        base["adversary"] = {
            "kind": adv.kind,
            "params": {
                "pauli_counts": list(adv.pauli_counts),
                "tamper_rate": adv.tamper_rate,
            },
        }
    if "protocol" not in base:
        raise ValueError("--protocol is required (flag or config file)")
    if "num_register_qubits" not in base and "num_qubits" not in base:
        raise ValueError("--qubits is required (flag or config file)")
    base.setdefault("depth", 1)
    config = config_from_dict(base)

    result = RUNNERS[config.protocol](config)
    if args.manifest_out:
        manifest = RunManifest(
            config=config,
            version=__version__,
            created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        with open(args.manifest_out, "w") as fh:
            fh.write(manifest.to_json() + "\n")
    if args.transcript_out:
        with open(args.transcript_out, "w") as fh:
            fh.write(result.transcript.to_jsonl())
    _emit(result.report.as_dict())
    return EXIT_OK if result.report.accepted else EXIT_REJECT


# ---------------------------------------------------------------------------
# oracle


def _add_oracle_parser(sub) -> None:
    p = sub.add_parser("oracle", help="print a gadget's per-branch soundness table")
    p.add_argument("--gadget", required=True, choices=ORACLE_GADGETS)
    p.add_argument("--theta-octant", type=int, default=0, help="angle as a multiple of pi/4")
    p.add_argument("--seed", type=int, default=2026, help="seed for input state and secrets")


def cmd_oracle(args) -> int:
    rows = branch_table(args.gadget, args.theta_octant, seed=args.seed)
    payload = {
        "gadget": args.gadget,
        "theta_octant": args.theta_octant,
        "fidelity_floor": 1.0 - GADGET_FIDELITY_ATOL,
        "branches": [
            {
                "outcomes": list(r.outcomes),
                "probability": r.probability,
                "fidelity": r.fidelity,
                **({"announced_octant": r.announced} if r.announced is not None else {}),
            }
            for r in rows
        ],
        "all_pass": table_passes(rows),
    }
    _emit(payload)
    return EXIT_OK if payload["all_pass"] else EXIT_REJECT


# ---------------------------------------------------------------------------
# attack


def _add_attack_parser(sub) -> None:
    p = sub.add_parser("attack", help="escape / tamper analysis against the traps")
    p.add_argument("--protocol", choices=("p1", "p2"), default=None)
    p.add_argument("--pauli", help="a,b,c counts of X / Z / XZ errors (p1)")
    p.add_argument("--tamper", type=float, help="per-bit report fidelity (p2)")
    p.add_argument("--qubits", type=int, default=9, help="register width (pauli)")
    p.add_argument("--traps", type=int, default=4, help="trap count (tamper)")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=7)


def cmd_attack(args) -> int:
    if (args.pauli is None) == (args.tamper is None):
        raise ValueError("give exactly one of --pauli a,b,c or --tamper rate")
    if args.pauli is not None:
        if args.protocol not in (None, "p1"):
            raise ValueError("stray-Pauli attacks act on the p1 handover")
        parts = args.pauli.split(",")
        if len(parts) != 3:
            raise ValueError(f"--pauli needs three counts, got {args.pauli!r}")
        counts = tuple(int(x) for x in parts)
        good, total = escape_counts(args.qubits, counts)
        bound = escape_bound(sum(counts))
        payload = {
            "kind": "random_pauli",
            "protocol": "p1",
            "num_qubits": args.qubits,
            "pauli_counts": list(counts),
            "exact": good / total,
            "exact_fraction": f"{good}/{total}",
            "bound": bound,
            "bound_formula": "(2/3)^(alpha/3)",
        }
        ok = good / total <= bound + 1e-12
        if args.trials > 0:
            analysis = simulate_escape(
                args.qubits, counts, args.trials, rng.stream(args.seed, "adversary")
            )
            payload.update(
                trials=analysis.trials,
                escaped=analysis.escaped,
                estimate=analysis.estimate,
                z_score=analysis.z_score,
            )
            ok = ok and abs(analysis.z_score) <= 4.0
        payload["passed"] = ok
        _emit(payload)
        return EXIT_OK if ok else EXIT_REJECT

    if args.protocol not in (None, "p2"):
        raise ValueError("report tampering corrupts the p2 server reports")
    rate = args.tamper
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"tamper rate {rate} outside [0, 1]")
    exact = tamper_acceptance_exact(rate, args.traps)
    payload = {
        "kind": "trap_tamper",
        "protocol": "p2",
        "tamper_rate": rate,
        "trap_count": args.traps,
        "exact_acceptance": exact,
    }
    ok = True
    if args.trials > 0:
        estimate = simulate_tamper_acceptance(
            rate, args.traps, args.trials, rng.stream(args.seed, "adversary")
        )
        sigma = math.sqrt(max(exact * (1.0 - exact), 1e-12) / args.trials)
        z = (estimate - exact) / sigma
        payload.update(trials=args.trials, estimate=estimate, z_score=z)
        ok = abs(z) <= 4.0
    payload["passed"] = ok
    _emit(payload)
    return EXIT_OK if ok else EXIT_REJECT


# ---------------------------------------------------------------------------
# blindness


def _add_blindness_parser(sub) -> None:
    p = sub.add_parser("blindness", help="run one of the leakage audits")
    p.add_argument("--audit", required=True, choices=("theta", "nosig", "tv", "probe"))
    p.add_argument("--samples", type=int, default=100, help="probe count (probe audit)")
    p.add_argument("--runs", type=int, default=200, help="runs per secret (sampled tv)")
    p.add_argument("--seed", type=int, default=404)
    p.add_argument("--gadget", default="p2", help="gadget for the exact tv audit")
    p.add_argument("--octant-a", type=int, default=1, help="first secret octant (tv)")
    p.add_argument("--octant-b", type=int, default=5, help="second secret octant (tv)")
    p.add_argument("--config-a", help="first run config JSON (sampled tv audit)")
    p.add_argument("--config-b", help="second run config JSON (sampled tv audit)")


def cmd_blindness(args) -> int:
    if args.audit == "theta":
        res = audit_theta_uniformity()
    elif args.audit == "nosig":
        res = audit_no_signaling(seed=args.seed)
    elif args.audit == "probe":
        res = audit_probe_gram(num_probes=args.samples, seed=args.seed)
    else:
        if (args.config_a is None) != (args.config_b is None):
            raise ValueError("the sampled tv audit needs both --config-a and --config-b")
        if args.config_a:
            # sampled permutation test on whole-run transcripts
            with open(args.config_a) as fh:
                config_a = config_from_dict(json.load(fh))
            with open(args.config_b) as fh:
                config_b = config_from_dict(json.load(fh))
            if config_a.protocol != config_b.protocol:
                raise ValueError("tv audit configs must share a protocol")
            res = audit_transcript_tv(
                RUNNERS[config_a.protocol],
                config_a,
                config_b,
                runs=args.runs,
                seed=args.seed,
            )
        else:
            # exact enumerated gadget-view distributions
            res = audit_gadget_view_tv(args.gadget, args.octant_a, args.octant_b)
    _emit(
        {
            "audit": res.name,
            "passed": res.passed,
            "statistic": res.statistic,
            "threshold": res.threshold,
            "details": res.details,
        }
    )
    return EXIT_OK if res.passed else EXIT_REJECT


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="adbqc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"adbqc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)
    _add_oracle_parser(sub)
    _add_attack_parser(sub)
    _add_blindness_parser(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "run": cmd_run,
        "oracle": cmd_oracle,
        "attack": cmd_attack,
        "blindness": cmd_blindness,
    }[args.command]
    try:
        return handler(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"adbqc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
