"""Command-line front end.

Subcommands: ``game`` (inspect games and winning probabilities),
``channel`` (build/validate game channels), ``capacity`` (closed form,
iterative bound, gap), ``sweep`` (gap-vs-noise CSV dataset) and
``simulate`` (Monte Carlo decomposition and coding experiments).

Exit codes: 0 success, 1 numeric or validation failure, 2 usage error.
Every result file embeds (JSON) or sits next to (CSV) a run manifest with
the full parameter set and seed; runs with a fixed seed are bit-identical
apart from the manifest's wall-clock field.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .capacity import (
    GbaConfig,
    cooperation_gap,
    eta_sweep,
    gba_sum_capacity,
    write_sweep_csv,
)
from .channels import (
    Channel,
    ChannelParams,
    GameChannelReport,
    GameChannelValidationError,
    MODE_GLOBAL,
    MODE_PER_RECEIVER,
    build_game_channel,
    closed_form_sum_capacity,
    validate_game_channel,
)
from .correlations import (
    CorrelationTable,
    classical_max_win,
    make_pr_box,
    table_from_deterministic,
    winning_probability,
)
from .games import BUILTIN_GAMES, Game, game_from_spec, make_chsh, make_magic_square, make_parity
from .quantum import born_table, make_ghz_parity, make_mermin_peres, make_tsirelson_chsh
from .simulate import (
    SimConfig,
    empirical_decomposition_test,
    end_to_end,
    random_codebook,
    repetition_codebook,
)

BOX_CLASSES = ("classical", "pr", "tsirelson", "mermin-peres", "ghz")


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    rng_seed: int | None
    version: str = __version__
    wall_clock_s: float = 0.0
    outputs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "rng_seed": self.rng_seed,
            "version": self.version,
            "wall_clock_s": self.wall_clock_s,
            "outputs": list(self.outputs),
        }


def _manifest(args: argparse.Namespace, seed: int | None) -> RunManifest:
    params = {
        k: v for k, v in vars(args).items() if k not in ("func", "command") and not callable(v)
    }
    return RunManifest(subcommand=args.command, parameters=params, rng_seed=seed)


def _resolve_seed(args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    seed = int(np.random.SeedSequence().entropy % (2**31))
    print(f"auto-generated seed: {seed}", file=sys.stderr)
    return seed


def _read_json(path: str, kind: str) -> dict:
    """Load a result JSON, unwrapping the manifest envelope if present."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {kind} file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed {kind} JSON: {exc}") from exc
    if isinstance(doc, dict) and "result" in doc:
        return doc["result"]
    return doc


def _load_game(token: str, k: int) -> Game:
    if token.endswith(".json") or os.path.sep in token or os.path.exists(token):
        try:
            return game_from_spec(_read_json(token, "game spec"))
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed game spec: {exc}") from exc
    if token == "chsh":
        return make_chsh()
    if token == "magic-square":
        return make_magic_square()
    if token == "parity":
        return make_parity(k)
    raise UsageError(
        f"unknown game '{token}' (built-ins: {', '.join(BUILTIN_GAMES)}, or a spec JSON path)"
    )


def _load_box(token: str, game: Game) -> CorrelationTable:
    if token.endswith(".json") or os.path.sep in token or os.path.exists(token):
        try:
            box = CorrelationTable.from_dict(_read_json(token, "box"))
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed box JSON: {exc}") from exc
    elif token == "classical":
        _, best = classical_max_win(game)
        box = table_from_deterministic(best)
    elif token == "pr":
        box = make_pr_box()
    elif token == "tsirelson":
        box = born_table(make_tsirelson_chsh())
    elif token == "mermin-peres":
        box = born_table(make_mermin_peres())
    elif token == "ghz":
        box = born_table(make_ghz_parity(game.num_parties))
    else:
        raise UsageError(
            f"unknown box '{token}' (choices: {', '.join(BOX_CLASSES)}, or a table JSON path)"
        )
    if not box.matches_game(game):
        raise UsageError(f"box '{token}' does not fit game '{game.name}'")
    return box


def _channel_params(args: argparse.Namespace) -> ChannelParams:
    mode = getattr(args, "mode", MODE_PER_RECEIVER)
    try:
        if args.eta_w is not None or args.eta_l is not None:
            if args.eta_w is None or args.eta_l is None:
                raise UsageError("--eta-w and --eta-l must be given together")
            return ChannelParams(eta_w=args.eta_w, eta_l=args.eta_l, mode=mode)
        return ChannelParams.from_noise(args.eta, mode=mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write_json(path: str, result: dict, manifest: RunManifest) -> None:
    manifest.outputs.append(path)
    with open(path, "w") as fh:
        json.dump({"manifest": manifest.to_dict(), "result": result}, fh, indent=2)
        fh.write("\n")


def _print_report(report: GameChannelReport) -> None:
    print(f"mode: {report.mode}")
    for i in range(report.num_receivers):
        print(
            f"receiver {i + 1}: |Q|={report.receiver_question_sizes[i]} "
            f"|Y|={report.output_sizes[i]} h_w={report.h_w[i]:.6f} "
            f"weakly_symmetric={'yes' if report.weakly_symmetric[i] else 'no'}"
        )
    print(f"factorization residual: {report.max_factorization_residual:.3g}")
    print(f"entropy margin: {report.entropy_margin:.6f}")
    print(f"closed-form sum capacity: {closed_form_sum_capacity(report):.6f}")


def _report_dict(report: GameChannelReport) -> dict:
    return {
        "mode": report.mode,
        "receiver_question_sizes": list(report.receiver_question_sizes),
        "output_sizes": list(report.output_sizes),
        "h_w_bits": list(report.h_w),
        "weakly_symmetric": [bool(v) for v in report.weakly_symmetric],
        "max_factorization_residual": report.max_factorization_residual,
        "entropy_margin": report.entropy_margin,
        "closed_form_sum_capacity_bits": closed_form_sum_capacity(report),
    }


def cmd_game(args: argparse.Namespace) -> int:
    game = _load_game(args.game, args.k)
    if args.action == "show":
        print(f"name: {game.name}")
        print(f"parties: {game.num_parties}")
        print(f"question sizes: {game.question_sizes}")
        print(f"answer sizes: {game.answer_sizes}")
        total = int(np.prod(game.winning.shape))
        print(f"winning tuples: {int(game.winning.sum())} / {total}")
        return 0
    if args.strategy_class == "classical":
        value, _ = classical_max_win(game)
    else:
        box = _load_box(args.strategy_class, game)
        value = winning_probability(game, box)
    print(f"{value:.10g}")
    return 0


def cmd_channel(args: argparse.Namespace) -> int:
    if args.action == "build":
        game = _load_game(args.game, args.k)
        params = _channel_params(args)
        channel = build_game_channel(game, params)
        report = validate_game_channel(channel, game)
        _print_report(report)
        if args.out:
            manifest = _manifest(args, None)
            _write_json(args.out, channel.to_dict(), manifest)
            print(f"wrote {args.out}")
        return 0
    # validate
    try:
        channel = Channel.from_dict(_read_json(args.channel, "channel"))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed channel JSON: {exc}") from exc
    game = _load_game(args.game, args.k)
    report = validate_game_channel(channel, game)
    _print_report(report)
    if args.report_csv:
        report.to_csv(args.report_csv)
        print(f"wrote {args.report_csv}")
    return 0


def cmd_capacity(args: argparse.Namespace) -> int:
    game = _load_game(args.game, args.k)
    params = _channel_params(args)
    channel = build_game_channel(game, params)
    if args.action == "closed-form":
        report = validate_game_channel(channel, game)
        value = closed_form_sum_capacity(report)
        print(f"{value:.6f}")
        if args.out:
            _write_json(args.out, _report_dict(report), _manifest(args, None))
        return 0
    seed = _resolve_seed(args)
    cfg = GbaConfig(num_starts=args.starts, rng_seed=seed, tolerance=args.tolerance)
    manifest = _manifest(args, seed)
    t0 = time.perf_counter()
    if args.action == "gba":
        result = gba_sum_capacity(channel, cfg)
        print(f"{result.value:.6f}")
        print(f"converged starts: {result.num_converged}/{len(result.starts)}")
        payload = result.to_dict()
    else:  # gap
        closed, gba_value, gap = cooperation_gap(channel, game, cfg)
        print(f"closed-form: {closed:.6f}")
        print(f"gba: {gba_value:.6f}")
        print(f"gap: {gap:.6f}")
        payload = {
            "closed_form_bits": closed,
            "gba_bits": gba_value,
            "gap_bits": gap,
        }
    manifest.wall_clock_s = time.perf_counter() - t0
    if args.out:
        _write_json(args.out, payload, manifest)
    return 0


def _parse_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("grid must be start:stop:step or a comma list")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise UsageError("grid step must be positive")
        grid = []
        k = 0
        while True:
            v = start + k * step
            if v >= stop - 1e-12:
                break
            grid.append(round(v, 12))
            k += 1
    else:
        grid = [float(p) for p in text.split(",") if p.strip()]
    if not grid:
        raise UsageError("empty eta grid")
    for v in grid:
        if not 0.0 <= v < 0.5:
            raise UsageError(f"eta={v} outside [0, 0.5)")
    return grid


def cmd_sweep(args: argparse.Namespace) -> int:
    game = _load_game(args.game, args.k)
    grid = _parse_grid(args.eta_grid)
    seed = _resolve_seed(args)
    cfg = GbaConfig(num_starts=args.starts, rng_seed=seed, tolerance=args.tolerance)
    manifest = _manifest(args, seed)
    t0 = time.perf_counter()
    rows = eta_sweep(game, grid, cfg)
    manifest.wall_clock_s = time.perf_counter() - t0
    for r in rows:
        print(
            f"eta={r.eta:.4f} closed={r.closed_form_bits:.6f} gba={r.gba_bits:.6f} "
            f"gap={r.gap_bits:.6f} converged={r.converged_starts}"
        )
    write_sweep_csv(rows, args.out)
    manifest.outputs.append(args.out)
    with open(args.out + ".manifest.json", "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.out}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    game = _load_game(args.game, args.k)
    params = _channel_params(args)
    channel = build_game_channel(game, params)
    box = _load_box(args.box, game)
    seed = _resolve_seed(args)
    manifest = _manifest(args, seed)
    t0 = time.perf_counter()
    if args.action == "decompose":
        report = empirical_decomposition_test(channel, game, box, args.samples, seed)
        print(f"winning fraction: {report.winning_fraction:.10g}")
        for i, tv in enumerate(report.tv_per_receiver):
            print(f"receiver {i + 1} max TV: {tv:.6f}")
        print(f"max conditional MI: {report.max_conditional_mi_bits:.6f} bits")
        payload = report.to_dict()
    else:  # e2e
        cfg = SimConfig(
            block_length=args.n, samples=args.trials, rng_seed=seed,
            rates=tuple(args.rate or []),
        )
        if args.code == "repetition":
            codebook = repetition_codebook(game.question_sizes, args.messages, args.n)
        else:
            if not args.rate:
                raise UsageError("random codebooks need --rate (bits/use per user)")
            rates = args.rate
            if len(rates) == 1:
                rates = rates * game.num_parties
            if len(rates) != game.num_parties:
                raise UsageError("--rate takes one value or one per transmitter")
            codebook = random_codebook(game.question_sizes, rates, args.n, seed)
        report = end_to_end(channel, game, box, codebook, cfg)
        print(f"winning fraction: {report.winning_fraction:.10g}")
        for i, err in enumerate(report.per_receiver_error):
            print(f"receiver {i + 1} error rate: {err:.6f}")
        print(f"message-tuple error rate: {report.tuple_error:.6f}")
        payload = report.to_dict()
    manifest.wall_clock_s = time.perf_counter() - t0
    if args.out:
        _write_json(args.out, payload, manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamecap",
        description="Game channels: cooperative capacity gaps, numerically.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_game_arg(p):
        p.add_argument("game", help="built-in game name or game-spec JSON path")
        p.add_argument("--k", type=int, default=3, help="party count for the parity game")

    def add_eta_args(p, with_mode=True):
        p.add_argument("--eta", type=float, default=0.0,
                       help="noise knob: eta_w = 1 - eta, eta_l = eta")
        p.add_argument("--eta-w", type=float, default=None, help="explicit winning weight")
        p.add_argument("--eta-l", type=float, default=None, help="explicit losing weight")
        if with_mode:
            p.add_argument("--mode", choices=(MODE_PER_RECEIVER, MODE_GLOBAL),
                           default=MODE_PER_RECEIVER)

    def add_gba_args(p):
        p.add_argument("--starts", type=int, default=50)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tolerance", type=float, default=1e-9)

    p_game = sub.add_parser("game", help="inspect games and winning probabilities")
    game_sub = p_game.add_subparsers(dest="action", required=True)
    p_show = game_sub.add_parser("show")
    add_game_arg(p_show)
    p_win = game_sub.add_parser("winprob")
    add_game_arg(p_win)
    p_win.add_argument("--class", dest="strategy_class", required=True,
                       help=f"one of {', '.join(BOX_CLASSES)} or a box JSON path")
    p_game.set_defaults(func=cmd_game)

    p_ch = sub.add_parser("channel", help="build and validate game channels")
    ch_sub = p_ch.add_subparsers(dest="action", required=True)
    p_build = ch_sub.add_parser("build")
    add_game_arg(p_build)
    add_eta_args(p_build)
    p_build.add_argument("--out", default=None, help="channel JSON output path")
    p_val = ch_sub.add_parser("validate")
    p_val.add_argument("channel", help="channel JSON path")
    p_val.add_argument("--game", required=True, dest="game",
                       help="built-in game name or game-spec JSON path")
    p_val.add_argument("--k", type=int, default=3)
    p_val.add_argument("--report-csv", default=None, help="write the per-receiver report CSV")
    p_ch.set_defaults(func=cmd_channel)

    p_cap = sub.add_parser("capacity", help="closed form, iterative bound, gap")
    cap_sub = p_cap.add_subparsers(dest="action", required=True)
    for name in ("closed-form", "gba", "gap"):
        p = cap_sub.add_parser(name)
        add_game_arg(p)
        add_eta_args(p)
        p.add_argument("--out", default=None, help="result JSON output path")
        if name != "closed-form":
            add_gba_args(p)
    p_cap.set_defaults(func=cmd_capacity)

    p_sweep = sub.add_parser("sweep", help="gap versus noise dataset (CSV)")
    add_game_arg(p_sweep)
    p_sweep.add_argument("--eta-grid", default="0:0.5:0.02",
                         help="start:stop:step (stop-exclusive) or comma list")
    add_gba_args(p_sweep)
    p_sweep.add_argument("--out", required=True, help="CSV output path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("simulate", help="Monte Carlo experiments")
    sim_sub = p_sim.add_subparsers(dest="action", required=True)
    p_dec = sim_sub.add_parser("decompose")
    add_game_arg(p_dec)
    add_eta_args(p_dec)
    p_dec.add_argument("--box", required=True,
                       help=f"one of {', '.join(BOX_CLASSES)} or a box JSON path")
    p_dec.add_argument("--samples", type=int, default=100_000)
    p_dec.add_argument("--seed", type=int, default=None)
    p_dec.add_argument("--out", default=None)
    p_e2e = sim_sub.add_parser("e2e")
    add_game_arg(p_e2e)
    add_eta_args(p_e2e, with_mode=False)
    p_e2e.add_argument("--box", required=True)
    p_e2e.add_argument("--n", type=int, default=15, help="block length")
    p_e2e.add_argument("--trials", type=int, default=10_000)
    p_e2e.add_argument("--messages", type=int, default=2,
                       help="messages per user for the repetition codebook")
    p_e2e.add_argument("--code", choices=("repetition", "random"), default="repetition")
    p_e2e.add_argument("--rate", type=float, nargs="*", default=None,
                       help="bits/use per user for random codebooks")
    p_e2e.add_argument("--seed", type=int, default=None)
    p_e2e.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "simulate" and getattr(args, "action", None) == "e2e":
        # merged-output channels have no per-receiver decoding
        args.mode = MODE_PER_RECEIVER
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except GameChannelValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, FloatingPointError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
