"""Command-line entry point: ``snnequiv <command> ...``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import codecs
from .harness import GenConfig, check_equivalence, epsilon_transfer, negative_control_config, random_network
from .netio import dump_json, load_network, load_records, load_trains, network_to_dict, save_network
from .ntheory import check_eta_bounds, divisor_matrix, mobius_alpha, solve_alpha_substitution
from .sim import simulate, simulate_decaying_reset, write_traces
from .transform import decode_outputs, multi_to_single, single_to_multi


def _cmd_mobius(args) -> int:
    alpha = mobius_alpha(args.n)
    residual = divisor_matrix(args.n).matvec(alpha.array)
    ok = residual[0] == 1 and not residual[1:].any()
    same = alpha == solve_alpha_substitution(args.n)
    print(f"N = {args.n}")
    print("alpha =", " ".join(str(a) for a in alpha.values))
    print(f"support size (eta) = {len(alpha.support())}")
    print(f"M alpha = e0: {'ok' if ok else 'FAILED'}")
    print(f"matches forward substitution: {'ok' if same else 'FAILED'}")
    return 0 if ok and same else 1


def _cmd_eta(args) -> int:
    rep = check_eta_bounds(args.n)
    print(f"eta({rep.n}) = {rep.eta}  ratio = {rep.eta / rep.n:.6f}")
    print(f"eta <= N: {rep.at_most_n}  slack = {rep.slack_n}")
    print(f"eta < 6/pi^2 N + sqrt N: {rep.holds_all}  slack = {rep.slack_all:.6f}")
    if rep.bound_large is None:
        print("eta < 6/pi^2 N + sqrt(N)/2: not claimed for N < 8")
    else:
        print(f"eta < 6/pi^2 N + sqrt(N)/2: {rep.holds_large}  slack = {rep.slack_large:.6f}")
    return 0 if rep.holds else 1


def _cmd_transform(args) -> int:
    net = load_network(args.inp)
    if args.direction == "m2s":
        out = multi_to_single(net)
    else:
        if args.ns is None:
            raise SystemExit("--ns is required for s2m")
        out = single_to_multi(net, args.ns, prune=not args.no_prune)
    save_network(out.network, args.out)
    sidecar = args.map or str(Path(args.out).with_suffix("")) + ".map.json"
    dump_json(out.sidecar(), sidecar)
    print(f"{args.direction}: {len(net.neurons)} -> {len(out.network.neurons)} neurons; "
          f"wrote {args.out} and {sidecar}")
    return 0


def _load_inputs(args, net):
    if args.inputs:
        return [load_trains(args.inputs)]
    if args.data:
        enc = codecs.ENCODERS[args.encode]
        span = args.t_max if args.encode == "latency" and args.t_max else net.horizon
        return [enc(x, span) for x in load_records(args.data)]
    return [[[] for _ in range(net.d_in)]]


def _jsonable(values):
    return [("inf" if isinstance(v, float) and math.isinf(v) else v) for v in values]


def _cmd_simulate(args) -> int:
    net = load_network(args.net)
    run = simulate_decaying_reset if args.decaying else simulate
    batches = _load_inputs(args, net)
    lines = []
    for k, inputs in enumerate(batches):
        res = run(net, inputs, record_traces=bool(args.traces))
        trains = decode_outputs(net, res, first_spike=args.first_spike_outputs)
        rec = {"record": k, "outputs": [list(t) for t in trains]}
        if args.decode:
            rec["decoded"] = _jsonable(codecs.DECODERS[args.decode](trains, net.dt))
        lines.append(json.dumps(rec, sort_keys=True))
        if args.traces:
            path = args.traces if len(batches) == 1 else f"{args.traces}.{k}"
            write_traces(res, path)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_verify(args) -> int:
    overrides = {"seed": args.seed, "trials": args.trials}
    if args.ns is not None:
        overrides["ns"] = (args.ns,)
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.negative_control:
        if args.direction != "m2s":
            raise SystemExit("--negative-control applies to --pass m2s")
        cfg = negative_control_config(**overrides)
        report = check_equivalence(cfg, "m2s", model="decaying", workers=args.workers)
    else:
        cfg = GenConfig(**overrides)
        report = check_equivalence(cfg, args.direction, workers=args.workers)
    text = dump_json(report.to_dict(with_accounting=not args.brief))
    if args.report:
        Path(args.report).write_text(text)
    s = report.summary()
    print(" ".join(f"{k}={v}" for k, v in s.items()))
    clean = report.failed_trials == 0 and report.budget_violations == 0
    if args.negative_control:
        return 0 if report.failed_trials > 0 else 1
    return 0 if clean else 1


def _cmd_epsilon(args) -> int:
    cfg = GenConfig(seed=args.seed)
    rows, ok = [], True
    for t in range(args.pairs):
        r = epsilon_transfer(cfg, args.direction, args.decode, trial=t, encoder=args.encode)
        ok &= r.equal
        rows.append({"trial": t, "equal": r.equal, "budget_ok": r.budget_ok,
                     "errors": {str(p): _jsonable(list(e)) for p, e in r.errors.items()}})
    text = dump_json({"direction": args.direction, "decoder": args.decode,
                      "encoder": args.encode, "pairs": rows})
    if args.report:
        Path(args.report).write_text(text)
    print(f"{sum(r['equal'] for r in rows)}/{len(rows)} pairs with identical errors")
    return 0 if ok else 1


def _cmd_generate(args) -> int:
    cfg = GenConfig(seed=args.seed)
    net = random_network(cfg, args.trial, kind=args.kind)
    if args.out:
        save_network(net, args.out)
    else:
        sys.stdout.write(dump_json(network_to_dict(net)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="snnequiv", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mobius", help="weight factors and M alpha = e0 check")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_mobius)

    p = sub.add_parser("eta", help="square-free count and its bounds")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_eta)

    p = sub.add_parser("transform", help="apply a pass to a network file")
    p.add_argument("--direction", choices=["m2s", "s2m"], required=True)
    p.add_argument("--ns", type=int)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--map", help="sidecar path (default: <out>.map.json)")
    p.add_argument("--no-prune", action="store_true", help="keep zero-factor population members")
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("simulate", help="run a network file")
    p.add_argument("--net", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--inputs", help="spike-train file, one channel per record")
    src.add_argument("--data", help="data file, one real vector per record")
    p.add_argument("--encode", choices=sorted(codecs.ENCODERS), default="latency")
    p.add_argument("--t-max", type=int, help="latency encoding span (default: horizon)")
    p.add_argument("--decode", choices=sorted(codecs.DECODERS))
    p.add_argument("--first-spike-outputs", action="store_true",
                   help="filter outputs to their first spike (s2m networks)")
    p.add_argument("--decaying", action="store_true", help="use the decaying-reset model")
    p.add_argument("--traces", help="write membrane traces as CSV")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="seeded differential check of a pass")
    p.add_argument("--pass", dest="direction", choices=["m2s", "s2m"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--ns", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--negative-control", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--brief", action="store_true", help="omit per-trial accounting")
    p.add_argument("--report")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("epsilon", help="approximation-error transfer check")
    p.add_argument("--pass", dest="direction", choices=["m2s", "s2m"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--decode", choices=sorted(codecs.DECODERS), default="latency")
    p.add_argument("--encode", choices=sorted(codecs.ENCODERS))
    p.add_argument("--report")
    p.set_defaults(func=_cmd_epsilon)

    p = sub.add_parser("generate", help="emit a random network")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--kind", choices=["multi", "single"], default="multi")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
