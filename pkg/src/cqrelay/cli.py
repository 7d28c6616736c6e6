"""Command-line front end: chi, region, verify, simulate, generate.

Every subcommand is deterministic for fixed flags, files, and seed, and the
emitted bytes are stable across runs (sorted JSON keys, fixed float formats).
Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 resource
limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .channels import (
    BroadcastCQChannel,
    CQChannel,
    MACCQChannel,
    adder_mac_channel,
    channel_to_jsonable,
    conditional_entropy,
    constant_channel,
    depolarized_channel,
    holevo_chi,
    load_channel,
    orthogonal_pure_channel,
    output_state,
    overlap_pair_channel,
    product_broadcast_channel,
)
from .coding import SimConfig, end_to_end_broadcast_sim
from .errors import InvalidInputError, RelayError, ResourceLimitError
from .lemmas import sweep_lemma_checks
from .operators import ProbabilityDistribution, von_neumann_entropy
from .regions import DistributionGrid, broadcast_region, intersect_regions, mac_region
from .typicality import (
    resolve_preset,
    typical_sequences,
    verify_conditional_projector_bounds,
    verify_state_projector_bounds,
)

_DEFAULT_PROJECTOR_NS = "2,3,4,5,6,7,8,9,10"
_DEFAULT_PROJECTOR_ALPHAS = "0.5,1,2"
_PROJECTOR_INSTANCES = 20


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors map to exit code 1."""

    def error(self, message):
        raise InvalidInputError(message)


def _emit(text: str, out_path: str | None) -> None:
    data = text if text.endswith("\n") else text + "\n"
    if out_path:
        try:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(data)
        except OSError as exc:
            raise InvalidInputError(f"cannot write output file {out_path!r}: {exc}") from None
    else:
        sys.stdout.write(data)


def _emit_json(obj, out_path: str | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True), out_path)


def _parse_dist(text: str, labels) -> ProbabilityDistribution:
    try:
        weights = [float(part) for part in text.split(",")]
    except ValueError:
        raise InvalidInputError(f"cannot parse distribution {text!r}") from None
    if len(weights) != len(labels):
        raise InvalidInputError(
            f"distribution has {len(weights)} weights but the alphabet has {len(labels)} letters"
        )
    return ProbabilityDistribution(tuple(labels), np.asarray(weights, dtype=float))


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise InvalidInputError(f"cannot parse {flag} value {text!r}") from None
    if not values:
        raise InvalidInputError(f"{flag} needs at least one value")
    return values


def _parse_int_list(text: str, flag: str) -> list[int]:
    values = _parse_float_list(text, flag)
    out = []
    for v in values:
        if abs(v - round(v)) > 0:
            raise InvalidInputError(f"{flag} entries must be integers, got {v}")
        out.append(int(round(v)))
    return out


# ---------------------------------------------------------------------------
# chi
# ---------------------------------------------------------------------------


def cmd_chi(args) -> int:
    channel = load_channel(args.channel)
    if not isinstance(channel, CQChannel):
        raise InvalidInputError(
            "chi expects a single-receiver channel file; extract a marginal first"
        )
    if args.dist:
        dist = _parse_dist(args.dist, channel.alphabet)
    else:
        dist = ProbabilityDistribution.uniform(channel.alphabet)
    chi = holevo_chi(channel, dist)
    s_out = von_neumann_entropy(output_state(channel, dist))
    s_cond = conditional_entropy(channel, dist)
    if args.format == "json":
        _emit_json(
            {
                "chi_bits": chi,
                "output_entropy_bits": s_out,
                "conditional_entropy_bits": s_cond,
            },
            args.out,
        )
    else:
        lines = [
            f"chi_bits {chi:.9f}",
            f"output_entropy_bits {s_out:.9f}",
            f"conditional_entropy_bits {s_cond:.9f}",
        ]
        _emit("\n".join(lines), args.out)
    return 0


# ---------------------------------------------------------------------------
# region
# ---------------------------------------------------------------------------


def _default_grid_k(*alphabets) -> int:
    return 64 if max(len(a) for a in alphabets) <= 2 else 16


def _region_csv(region) -> str:
    lines = ["R1,R2"]
    lines.extend(f"{v[0]:.6f},{v[1]:.6f}" for v in region.vertices)
    return "\n".join(lines)


def _region_jsonable(region) -> dict:
    return {
        "vertices": [[round(v[0], 9), round(v[1], 9)] for v in region.vertices],
        "halfplanes": [[round(c, 9) for c in plane] for plane in region.halfplanes],
        "max_sum_rate": round(region.max_sum_rate(), 9),
    }


def _mac_region_from_args(args):
    if not args.mac_channel:
        raise InvalidInputError("this region kind needs --mac-channel")
    mac = load_channel(args.mac_channel)
    if not isinstance(mac, MACCQChannel):
        raise InvalidInputError(f"{args.mac_channel!r} does not hold a two-sender channel")
    k = args.grid_k or _default_grid_k(*mac.alphabets)
    grid = DistributionGrid(tuple(mac.alphabets[0]), k)
    grid2 = DistributionGrid(tuple(mac.alphabets[1]), k)
    return mac_region(mac, grid, args.variant, grid2)


def _broadcast_region_from_args(args):
    if not args.bc_channel:
        raise InvalidInputError("this region kind needs --bc-channel")
    bc = load_channel(args.bc_channel)
    if not isinstance(bc, BroadcastCQChannel):
        raise InvalidInputError(f"{args.bc_channel!r} does not hold a broadcast channel")
    k = args.grid_k or _default_grid_k(bc.alphabet)
    return broadcast_region(bc, DistributionGrid(tuple(bc.alphabet), k))


def cmd_region(args) -> int:
    if args.kind == "mac":
        named = [("mac", _mac_region_from_args(args))]
    elif args.kind == "broadcast":
        named = [("broadcast", _broadcast_region_from_args(args))]
    else:
        first = _mac_region_from_args(args)
        second = _broadcast_region_from_args(args)
        named = [
            ("mac", first),
            ("broadcast", second),
            ("intersection", intersect_regions(first, second)),
        ]
    if args.format == "json":
        if len(named) == 1:
            _emit_json(_region_jsonable(named[0][1]), args.out)
        else:
            _emit_json({name: _region_jsonable(r) for name, r in named}, args.out)
    else:
        if len(named) == 1:
            _emit(_region_csv(named[0][1]), args.out)
        else:
            blocks = [f"# {name}\n{_region_csv(r)}" for name, r in named]
            _emit("\n".join(blocks), args.out)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    mat = g @ g.conj().T
    return mat / np.trace(mat).real


def _random_binary_channel(rng: np.random.Generator, dim: int) -> CQChannel:
    states = {"0": _random_density(rng, dim), "1": _random_density(rng, dim)}
    return CQChannel(("0", "1"), states)


def _sample_typical_word(rng, dist, n, delta):
    tset = typical_sequences(dist, n, delta)
    labels = list(dist.labels)
    for _ in range(10_000):
        word = tuple(labels[i] for i in rng.choice(len(labels), size=n, p=dist.weights))
        if word in tset:
            return word
    raise ResourceLimitError("could not sample a typical word for verification")


def _verify_projectors(ns, alphas, preset, seed, instances=_PROJECTOR_INSTANCES) -> dict:
    preset = resolve_preset(preset)
    base = np.random.SeedSequence(seed)
    state_stream, cond_stream = base.spawn(2)
    summary = {}

    failures = 0
    count = 0
    min_margin = float("inf")
    max_k = 0.0
    rng = np.random.default_rng(state_stream)
    for n in ns:
        for alpha in alphas:
            for i in range(instances):
                dim = 2 if i % 2 == 0 else 3
                report = verify_state_projector_bounds(
                    _random_density(rng, dim), n, alpha, preset
                )
                count += 1
                margin = report.measured["capture"] - report.reference_bounds["capture"]
                min_margin = min(min_margin, margin)
                max_k = max(max_k, report.empirical_K)
                ok = report.all_provable_hold()
                if preset == "fixed":
                    ok = ok and report.flags["reference_capture"]
                if not ok:
                    failures += 1
    summary["state"] = {
        "instances": count,
        "failures": failures,
        "min_reference_capture_margin": min_margin,
        "max_empirical_K": max_k,
        "all_hold": failures == 0,
    }

    failures = 0
    count = 0
    min_margin = float("inf")
    max_k = 0.0
    cross_checked = 0
    rng = np.random.default_rng(cond_stream)
    dist = ProbabilityDistribution(("0", "1"), np.array([0.5, 0.5]))
    for n in ns:
        for alpha in alphas:
            for i in range(instances):
                channel = _random_binary_channel(rng, 2 if i % 2 == 0 else 3)
                word = _sample_typical_word(rng, dist, n, 0.5)
                report = verify_conditional_projector_bounds(channel, word, dist, alpha, preset)
                count += 1
                margin = report.measured["capture"] - report.reference_bounds["capture"]
                min_margin = min(min_margin, margin)
                max_k = max(max_k, report.empirical_K)
                if "provable_cross_capture" in report.flags:
                    cross_checked += 1
                if not report.all_provable_hold():
                    failures += 1
    summary["conditional"] = {
        "instances": count,
        "failures": failures,
        "min_reference_capture_margin": min_margin,
        "max_empirical_K": max_k,
        "cross_capture_checked": cross_checked,
        "all_hold": failures == 0,
    }
    return summary


def cmd_verify(args) -> int:
    summary = {}
    ok = True
    if args.targets in ("lemmas", "all"):
        lemmas = sweep_lemma_checks(trials=args.trials, seed=args.seed)
        summary["lemmas"] = lemmas
        ok = ok and all(entry["all_hold"] for entry in lemmas.values())
    if args.targets in ("projectors", "all"):
        ns = _parse_int_list(args.n, "--n")
        alphas = _parse_float_list(args.alpha, "--alpha")
        projectors = _verify_projectors(ns, alphas, args.preset, args.seed)
        summary["projectors"] = projectors
        ok = ok and all(entry["all_hold"] for entry in projectors.values())
    if args.inject_verification_failure:
        summary["injected"] = {"all_hold": False, "note": "negative control"}
        ok = False
    summary["all_hold"] = ok
    _emit_json(summary, args.out)
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read config file {args.config!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config file {args.config!r} is not valid JSON: {exc}") from None
    config = SimConfig.from_dict(raw)
    bc = load_channel(args.bc_channel)
    if not isinstance(bc, BroadcastCQChannel):
        raise InvalidInputError(f"{args.bc_channel!r} does not hold a broadcast channel")
    report = end_to_end_broadcast_sim(bc, config)
    _emit_json(report, args.out)
    return 0


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

_FAMILIES = ("orthogonal", "overlap-pair", "depolarized", "constant", "adder-mac", "product-broadcast")


def cmd_generate(args) -> int:
    if args.family == "orthogonal":
        channel = orthogonal_pure_channel(args.dim)
    elif args.family == "overlap-pair":
        channel = overlap_pair_channel()
    elif args.family == "depolarized":
        channel = depolarized_channel(args.p, args.dim)
    elif args.family == "constant":
        channel = constant_channel(args.dim)
    elif args.family == "adder-mac":
        channel = adder_mac_channel()
    elif args.family == "product-broadcast":
        channel = product_broadcast_channel(
            orthogonal_pure_channel(2), depolarized_channel(args.p, 2)
        )
    else:
        raise InvalidInputError(f"unknown family {args.family!r}; pick from {_FAMILIES}")
    _emit_json(channel_to_jsonable(channel), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cqrelay", description="Two-phase relay channel toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_chi = sub.add_parser("chi", help="Holevo information of a channel file")
    p_chi.add_argument("--channel", required=True, help="channel JSON file (kind 'cq')")
    p_chi.add_argument("--dist", help="comma-separated input weights; uniform when omitted")
    p_chi.add_argument("--format", choices=("text", "json"), default="text")
    p_chi.add_argument("--out", help="output file; stdout when omitted")
    p_chi.set_defaults(func=cmd_chi)

    p_region = sub.add_parser("region", help="rate region polygons as CSV or JSON")
    p_region.add_argument("kind", choices=("mac", "broadcast", "bidirectional"))
    p_region.add_argument("--mac-channel", help="two-sender channel JSON file")
    p_region.add_argument("--bc-channel", help="broadcast channel JSON file")
    p_region.add_argument(
        "--grid-k",
        type=int,
        help="simplex grid resolution; default 64 for binary alphabets, 16 otherwise",
    )
    p_region.add_argument("--variant", choices=("conditional", "as-written"), default="conditional")
    p_region.add_argument("--format", choices=("csv", "json"), default="csv")
    p_region.add_argument("--out", help="output file; stdout when omitted")
    p_region.set_defaults(func=cmd_region)

    p_verify = sub.add_parser("verify", help="run inequality verification sweeps")
    p_verify.add_argument("targets", choices=("lemmas", "projectors", "all"))
    p_verify.add_argument("--trials", type=int, default=1000, help="instances per lemma sweep")
    p_verify.add_argument("--seed", type=int, default=20240801)
    p_verify.add_argument(
        "--n", default=_DEFAULT_PROJECTOR_NS, help="comma-separated block lengths for projectors"
    )
    p_verify.add_argument(
        "--alpha", default=_DEFAULT_PROJECTOR_ALPHAS, help="comma-separated threshold parameters"
    )
    p_verify.add_argument("--preset", choices=("fixed", "sqrt"), default="fixed")
    p_verify.add_argument("--out", help="output file; stdout when omitted")
    p_verify.add_argument(
        "--inject-verification-failure",
        action="store_true",
        help=argparse.SUPPRESS,
    )
    p_verify.set_defaults(func=cmd_verify)

    p_sim = sub.add_parser("simulate", help="run the broadcast-phase coding pipeline")
    p_sim.add_argument("--config", required=True, help="simulation config JSON file")
    p_sim.add_argument("--bc-channel", required=True, help="broadcast channel JSON file")
    p_sim.add_argument("--out", help="output file; stdout when omitted")
    p_sim.set_defaults(func=cmd_simulate)

    p_gen = sub.add_parser("generate", help="write a canonical test channel file")
    p_gen.add_argument("family", choices=_FAMILIES)
    p_gen.add_argument("--p", type=float, default=0.1, help="depolarizing weight where relevant")
    p_gen.add_argument("--dim", type=int, default=2, help="output dimension where relevant")
    p_gen.add_argument("--out", help="output file; stdout when omitted")
    p_gen.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RelayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
