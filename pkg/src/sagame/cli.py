"""Command-line front end.

Every command prints a JSON report on stdout (or writes it to ``--out``) and a
one-line summary on stderr. Exit codes: 0 success, 2 invalid input, 1
internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from sagame import instance as inst_mod
from sagame.instance import (ExplicitSampler, GenParams, InstanceFormatError, Mode,
                             MultistageInstance, SimpleGraph, TwoStageInstance,
                             build_hardness_instance)
from sagame.numeric import rat_of_string, rat_to_string
from sagame.saa import SaaConfig, count_vertex_covers, exact_value, saa_solve, saa_trials
from sagame.solver import (ValidationError, brute_force_multistage, brute_force_two_stage,
                           evaluate_first_stage, solve_multistage, solve_mvc, solve_two_stage)


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return rat_of_string(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_instance(args, kind=None):
    inst = inst_mod.loads(_read(args.input))
    if kind is not None and not isinstance(inst, kind):
        want = "two-stage" if kind is TwoStageInstance else "multistage"
        raise UsageError(f"{args.input}: expected a {want} instance")
    if getattr(args, "mode", None) is not None:
        if not args.force:
            raise UsageError("--mode changes the objective stated in the file; add --force")
        inst = inst.with_mode(Mode(args.mode))
    return inst


def _load_graph(path: str) -> SimpleGraph:
    return SimpleGraph.parse(_read(path))


def _dump_network(args, result) -> None:
    if getattr(args, "dump_network", None) and result.network is not None:
        with open(args.dump_network, "w", encoding="utf-8") as fh:
            fh.write(result.network.to_dot())


def cmd_solve(args):
    inst = _load_instance(args, TwoStageInstance)
    result = solve_two_stage(inst, keep_network=bool(args.dump_network))
    _dump_network(args, result)
    return result.to_json(), f"objective {rat_to_string(result.objective)}"


def cmd_multistage(args):
    inst = _load_instance(args, MultistageInstance)
    result = solve_multistage(inst, keep_network=bool(args.dump_network))
    _dump_network(args, result)
    return result.to_json(), f"objective {rat_to_string(result.objective)}"


def cmd_mvc(args):
    inst = _load_instance(args, MultistageInstance)
    covers, cost = solve_mvc(inst.stages)
    return {"cost": cost, "covers": [sorted(c) for c in covers]}, f"cost {cost}"


def cmd_oracle(args):
    inst = _load_instance(args)
    if isinstance(inst, TwoStageInstance):
        result = brute_force_two_stage(inst)
    else:
        result = brute_force_multistage(inst)
    return result.to_json(), f"oracle objective {rat_to_string(result.objective)}"


def cmd_eval(args):
    inst = _load_instance(args, TwoStageInstance)
    if args.allocation:
        raw = json.loads(_read(args.allocation))
        if not isinstance(raw, dict):
            raise UsageError("allocation file must map vertex names to fraction strings")
        y = {v: rat_of_string(str(x)) for v, x in raw.items()}
    else:
        y = solve_two_stage(inst).first_stage
    value = evaluate_first_stage(y, inst)
    report = {"objective": rat_to_string(value),
              "first_stage": {v: rat_to_string(y[v]) for v in sorted(y)}}
    return report, f"expected loss {rat_to_string(value)}"


def _saa_source(path: str):
    text = _read(path)
    if text.lstrip().startswith("{"):
        inst = inst_mod.loads(text)
        if not isinstance(inst, TwoStageInstance):
            raise UsageError("saa needs a two-stage instance or a plain graph")
        problems = inst_mod.validate(inst)
        if problems:
            raise ValidationError(problems)
        return inst.g0, inst.lam, ExplicitSampler(inst.scenarios), inst.mode
    hard = build_hardness_instance(SimpleGraph.parse(text))
    return hard.g0, hard.lam, hard.sampler, hard.mode


def cmd_saa(args):
    g0, lam, sampler, mode = _saa_source(args.input)
    if args.mode is not None:
        if not args.force:
            raise UsageError("--mode changes the objective stated in the file; add --force")
        mode = Mode(args.mode)
    if args.samples is not None:
        if args.accuracy is not None or args.confidence is not None:
            raise UsageError("--samples excludes --accuracy/--confidence")
        cfg = SaaConfig(samples=args.samples)
    else:
        if args.accuracy is None or args.confidence is None:
            raise UsageError("give --samples, or both --accuracy and --confidence")
        cfg = SaaConfig(accuracy=args.accuracy, confidence=args.confidence)
    if args.trials > 1:
        ys = saa_trials(g0, lam, sampler, cfg, args.seed, args.trials, mode, jobs=args.jobs)
        values = [exact_value(y, g0, lam, sampler, mode) for y in ys] \
            if sampler.support() is not None else None
        report = {
            "samples": cfg.sample_count(lam, len(g0.side)),
            "seed": args.seed,
            "trials": [{v: rat_to_string(y[v]) for v in sorted(y)} for y in ys],
        }
        if values is not None:
            report["exact_objectives"] = [rat_to_string(v) for v in values]
        return report, f"{args.trials} SAA trials"
    result = saa_solve(g0, lam, sampler, cfg, args.seed, mode,
                       exact=sampler.support() is not None)
    return result.to_json(), f"SAA with N={result.samples}"


def cmd_gen(args):
    params = GenParams(n_left=args.left, n_right=args.right, density=args.density,
                       n_scenarios=args.scenarios, seed=args.seed, mode=Mode(args.mode),
                       new_players=args.new_players)
    inst = inst_mod.gen_random(params)
    return inst_mod.instance_to_json(inst), f"generated instance (seed {args.seed})"


def cmd_hardness(args):
    hard = build_hardness_instance(_load_graph(args.input))
    inst = hard.explicit()
    return inst_mod.instance_to_json(inst), \
        f"hardness instance: {len(inst.g0.side)} vertices, {len(inst.scenarios)} scenarios"


def cmd_count_vc(args):
    count = count_vertex_covers(_load_graph(args.input))
    return {"count": count}, f"{count} vertex covers"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sagame", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, mode=False, network=False):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--in", dest="input", required=name != "gen", metavar="PATH")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--jobs", type=int, default=1, metavar="K")
        if mode:
            p.add_argument("--mode", choices=[m.value for m in Mode])
            p.add_argument("--force", action="store_true")
        if network:
            p.add_argument("--dump-network", metavar="PATH")
        return p

    add("solve", cmd_solve, "solve a two-stage instance", mode=True, network=True)
    add("multistage", cmd_multistage, "solve a multistage instance", mode=True, network=True)
    add("mvc", cmd_mvc, "multistage vertex cover of the stages of a multistage file")
    add("oracle", cmd_oracle, "brute-force optimum of an instance", mode=True)
    p = add("eval", cmd_eval, "expected loss of a first-stage allocation", mode=True)
    p.add_argument("--allocation", metavar="PATH")
    p = add("saa", cmd_saa, "sample average approximation", mode=True)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--samples", type=int)
    p.add_argument("--accuracy", type=_fraction)
    p.add_argument("--confidence", type=_fraction)
    p.add_argument("--trials", type=int, default=1)
    p = add("gen", cmd_gen, "random two-stage instance")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--left", type=int, default=3)
    p.add_argument("--right", type=int, default=3)
    p.add_argument("--density", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--scenarios", type=int, default=2)
    p.add_argument("--new-players", type=int, default=1)
    p.add_argument("--mode", choices=[m.value for m in Mode], default="abs")
    add("hardness", cmd_hardness, "explicit hardness instance of a plain graph")
    add("count-vc", cmd_count_vc, "count the vertex covers of a plain graph")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        report, summary = args.func(args)
    except ValidationError as exc:
        stdout.write(json.dumps({"violations": exc.violations}, indent=2) + "\n")
        stderr.write("invalid instance\n")
        return 2
    except (InstanceFormatError, UsageError, OSError, ValueError, ZeroDivisionError) as exc:
        stdout.write(json.dumps({"violations": [str(exc)]}, indent=2) + "\n")
        stderr.write(f"error: {exc}\n")
        return 2
    except AssertionError as exc:
        stderr.write(f"internal error: {exc}\n")
        return 1
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    stderr.write(summary + "\n")
    return 0


def main() -> None:
    sys.exit(run())
