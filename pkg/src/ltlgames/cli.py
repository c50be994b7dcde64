"""
Command-line front end.

Every command reads an INI-style config with the sections ``[game]``,
``[automaton]``, ``[prm]``, ``[learn]`` and ``[output]``; flags override the
file.  Relative paths in a config resolve against the config's directory.

Exit codes: 0 success, 1 usage or I/O error, 2 verification failure,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analysis, automata, game, learner, ltl, prm, priority, product, strategy
from .errors import CapExceeded, FormatError

__all__ = ["RunConfig", "load_config", "main", "render_ascii", "render_svg"]

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_CAP = 0, 1, 2, 3

_LEARN_TYPES = {f.name: {"int": int, "float": float, "str": str}[f.type]
                for f in fields(learner.LearnSchedule) if f.name != "seed"}
_LEARN_KEYS = set(_LEARN_TYPES)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a command needs, after merging the config file and flags."""

    game: Path | None = None
    grid: Path | None = None
    automaton: Path | None = None
    formula: str | None = None
    max_stem: int = 3
    max_loop: int = 3
    epsilon: float = 0.01
    cap: int = 10**7
    schedule: dict = field(default_factory=dict)
    seed: int = 0
    out: Path = Path("out")
    strategy: Path | None = None
    adversary: Path | None = None
    svg: bool = False
    simulate_steps: int = 200

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise UsageError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        for name in ("game", "grid", "automaton", "strategy", "adversary"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise UsageError(f"{name} file not found: {p}")
        if self.game is not None and self.grid is not None:
            raise UsageError("give either a game file or a grid, not both")

    def learn_schedule(self, seed=None) -> learner.LearnSchedule:
        kw = dict(self.schedule)
        kw["seed"] = self.seed if seed is None else seed
        try:
            return learner.LearnSchedule(**kw)
        except (TypeError, ValueError) as err:
            raise UsageError(f"bad [learn] section: {err}") from None


def _path(value, base: Path):
    if value is None or value == "":
        return None
    p = Path(os.path.expanduser(value))
    return p if p.is_absolute() else base / p


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Merge a config file (optional) with flag overrides into a :class:`RunConfig`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            cp.read(path)
        except configparser.Error as err:
            raise UsageError(f"cannot parse {path}: {err}") from None
        base = path.parent
        unknown = set(cp.sections()) - {"game", "automaton", "prm", "learn", "output"}
        if unknown:
            raise UsageError(f"unknown config sections {sorted(unknown)}")
    get = lambda sec, key: cp.get(sec, key, fallback=None)
    try:
        schedule = {}
        if cp.has_section("learn"):
            for key, raw in cp.items("learn"):
                if key == "seed":
                    continue
                if key not in _LEARN_KEYS:
                    raise UsageError(f"unknown [learn] key {key!r}")
                conv = _LEARN_TYPES[key]
                schedule[key] = int(float(raw)) if conv is int else conv(raw)
        kw = dict(
            game=_path(get("game", "file"), base),
            grid=_path(get("game", "grid"), base),
            automaton=_path(get("automaton", "file"), base),
            formula=get("automaton", "formula"),
            max_stem=int(get("automaton", "max_stem") or 3),
            max_loop=int(get("automaton", "max_loop") or 3),
            epsilon=float(get("prm", "epsilon") or 0.01),
            cap=int(float(get("game", "cap") or 1e7)),
            schedule=schedule,
            seed=int(get("learn", "seed") or 0),
            out=_path(get("output", "dir"), base) or Path("out"),
            strategy=_path(get("output", "strategy"), base),
            adversary=_path(get("output", "adversary"), base),
            svg=(get("output", "svg") or "no").lower() in ("1", "yes", "true", "on"),
            simulate_steps=int(get("output", "simulate_steps") or 200),
        )
    except ValueError as err:
        raise UsageError(f"bad config value: {err}") from None
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in _LEARN_KEYS:
            kw["schedule"][key] = value
        elif key in ("game", "grid", "automaton", "strategy", "adversary", "out"):
            kw[key] = Path(value)
        else:
            kw[key] = value
    return RunConfig(**kw)


# pipeline pieces

def _load_game(cfg: RunConfig):
    if cfg.grid is not None:
        spec = game.load_grid(cfg.grid)
        return game.build_gridworld(spec), spec
    if cfg.game is not None:
        return game.load_game(cfg.game), None
    raise UsageError("no game given ([game] file or grid)")


def _load_automaton(cfg: RunConfig):
    if cfg.automaton is None:
        raise UsageError("no automaton given ([automaton] file)")
    return automata.load_hoa(cfg.automaton)


def _priority_game(cfg: RunConfig):
    g, spec = _load_game(cfg)
    d = _load_automaton(cfg)
    p = product.build_product(g, d)
    pg = priority.build_priority(p, prm.Prm(d.k, cfg.epsilon))
    return g, spec, d, p, pg


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


# commands

def cmd_check_automaton(cfg: RunConfig) -> int:
    if cfg.formula is None:
        raise UsageError("no formula given ([automaton] formula)")
    d = _load_automaton(cfg)
    f = ltl.parse_ltl(cfg.formula)
    rep = automata.check_equivalence_bounded(d, f, cfg.max_stem, cfg.max_loop, max_listed=20)
    lines = [f"formula: {cfg.formula}", f"automaton: {cfg.automaton}",
             f"bounds: stem <= {cfg.max_stem}, loop <= {cfg.max_loop}",
             f"lassos checked: {rep.checked}", f"disagreements: {rep.n_counterexamples}"]
    for cx in rep.counterexamples:
        lines.append(f"counterexample: {cx}")
    text = "\n".join(lines) + "\n"
    _write(cfg.out, "check_report.txt", text)
    print(text, end="")
    return EXIT_OK if rep.n_counterexamples == 0 else EXIT_VERIFY


def _pair_csv(p, res) -> str:
    lines = ["state,owner,action"]
    for s, sid in enumerate(p.states):
        owner = "controller" if p.controller[s] else "adversary"
        lines.append(f"{game.state_token(sid)},{owner},{p.actions[s][res.choice[s]]}")
    return "\n".join(lines) + "\n"


def cmd_solve(cfg: RunConfig, pair_cap: int = 10**5) -> int:
    g, _ = _load_game(cfg)
    d = _load_automaton(cfg)
    p = product.build_product(g, d)
    n = analysis.count_pairs(p)
    try:
        res = analysis.parity_value_exact(p, cap=cfg.cap)
    except CapExceeded as err:
        print(f"{err}; the game is too large for exhaustive solving, use 'learn' instead", file=sys.stderr)
        return EXIT_CAP
    _write(cfg.out, "value.txt", f"{res.value!r}\n")
    _write(cfg.out, "pair.csv", _pair_csv(p, res))
    if n <= pair_cap:
        vals = analysis.all_pair_values(p, cap=pair_cap)
        rows = ["controller_map,adversary_map,value"]
        rows += [f"{i},{j},{float(v)!r}" for (i, j), v in np.ndenumerate(vals)]
        _write(cfg.out, "pairs.csv", "\n".join(rows) + "\n")
    print(f"product states: {p.n_states}  strategy pairs: {n}")
    print(f"maximin satisfaction probability: {res.value:.12g}")
    return EXIT_OK


def _learn_one(cfg: RunConfig, seed: int, out: Path) -> dict:
    g, spec, d, p, pg = _priority_game(cfg)
    sch = cfg.learn_schedule(seed)
    res = learner.minimax_q_train(pg, sch)
    pair = learner.greedy_strategy(res.q)
    ctrl, adv = strategy.induce_strategy(pg, pair)
    value = strategy.evaluate_worst_case(g, d, ctrl)
    _write(out, "qtable.csv", res.q.to_csv())
    _write(out, "strategy_controller.txt", strategy.dump_strategy(ctrl))
    _write(out, "strategy_adversary.txt", strategy.dump_strategy(adv))
    _write(out, "curve.csv", learner.curve_csv(res.curve))
    summary = {"seed": seed, "epsilon": cfg.epsilon, "product_states": p.n_states,
               "priority_states": pg.n_states, "worst_case_value": value, "schedule": sch.to_dict()}
    _write(out, "evaluation.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def cmd_learn(cfg: RunConfig, parallel_seeds: int = 1) -> int:
    if parallel_seeds <= 1:
        summary = _learn_one(cfg, cfg.seed, cfg.out)
        print(f"seed {summary['seed']}: worst-case satisfaction probability {summary['worst_case_value']:.6g}")
        return EXIT_OK
    seeds = [cfg.seed + i for i in range(parallel_seeds)]
    outs = [cfg.out / f"seed_{s}" for s in seeds]
    with ProcessPoolExecutor(max_workers=min(parallel_seeds, os.cpu_count() or 1)) as ex:
        summaries = list(ex.map(_learn_one, [cfg] * len(seeds), seeds, outs))
    for s in summaries:
        print(f"seed {s['seed']}: worst-case satisfaction probability {s['worst_case_value']:.6g}")
    return EXIT_OK


def _controller(cfg: RunConfig, g, pg):
    if cfg.strategy is None:
        raise UsageError("no strategy file given ([output] strategy or --strategy)")
    st = strategy.load_strategy(cfg.strategy.read_text(), g)
    if st.player != "controller":
        raise UsageError("the strategy file does not hold a controller strategy")
    return strategy.attach_memory(st, pg)


def long_run_cells(pg, bottom) -> set:
    """Controller-state cells occupied by the given BSCCs of a priority-game chain."""
    g = pg.product.game
    cells = set()
    for B in bottom:
        for i in B:
            s = int(pg.product.sg[pg.x[i]])
            if g.controller[s]:
                cells.add(g.states[s])
    return cells


def render_ascii(spec: game.GridSpec, highlight=()) -> str:
    """Grid picture, top row first.

    Each cell shows its labels (``.`` when unlabelled); obstacles are ``###``,
    the initial cell is marked ``>`` and highlighted cells are wrapped in
    brackets.
    """
    grid = []
    for r in range(spec.height - 1, -1, -1):
        row = []
        for c in range(spec.width):
            if (r, c) in spec.obstacles:
                row.append(None)
                continue
            text = "".join(sorted(spec.labels.get((r, c), ()))) or "."
            if (r, c) == spec.initial:
                text = ">" + text
            if game.cell_id((r, c)) in highlight:
                text = f"[{text}]"
            row.append(text)
        grid.append(row)
    width = max([3] + [len(t) for row in grid for t in row if t is not None])
    rows = [" ".join("#" * width if t is None else t.center(width) for t in row) for row in grid]
    return "\n".join(rows) + "\n"


def render_svg(spec: game.GridSpec, highlight=(), size: int = 40) -> str:
    """Same picture as :func:`render_ascii` as a standalone SVG document."""
    w, h = spec.width * size, spec.height * size
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">']
    for r in range(spec.height):
        for c in range(spec.width):
            x, y = c * size, (spec.height - 1 - r) * size
            fill = "#ffffff"
            if game.cell_id((r, c)) in highlight:
                fill = "#c9a7e8"
            out.append(f'<rect x="{x}" y="{y}" width="{size}" height="{size}" fill="{fill}" stroke="#444"/>')
            if (r, c) in spec.obstacles:
                out.append(f'<circle cx="{x + size / 2}" cy="{y + size / 2}" r="{size * 0.4}" fill="#888"/>')
                continue
            text = "".join(sorted(spec.labels.get((r, c), ())))
            if (r, c) == spec.initial:
                text = ">" + text
            if text:
                out.append(f'<text x="{x + size / 2}" y="{y + size * 0.6}" font-size="{size * 0.35}" '
                           f'text-anchor="middle" font-family="monospace">{text}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_render(cfg: RunConfig) -> int:
    if cfg.grid is None:
        raise UsageError("render needs a grid game ([game] grid)")
    g, spec, d, p, pg = _priority_game(cfg)
    ctrl = _controller(cfg, g, pg)
    mc, bottom, v = strategy.worst_case_chain(ctrl)
    cells = long_run_cells(pg, bottom)
    text = render_ascii(spec, cells)
    _write(cfg.out, "render.txt", text)
    if cfg.svg:
        _write(cfg.out, "render.svg", render_svg(spec, cells))
    print(text, end="")
    print(f"worst-case satisfaction probability: {float(v[pg.initial]):.6g}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    g, spec, d, p, pg = _priority_game(cfg)
    ctrl = _controller(cfg, g, pg)
    if cfg.adversary is not None:
        adv = strategy.attach_memory(strategy.load_strategy(cfg.adversary.read_text(), g), pg)
        if adv.player != "adversary":
            raise UsageError("the adversary file does not hold an adversary strategy")
    else:
        # the worst-case adversary against this controller
        _, choice = strategy.worst_case_response(g, d, ctrl)
        choice = np.where(pg.controller, strategy._fold(ctrl, pg), choice)
        _, adv = strategy.induce_strategy(pg, choice)
    rng = learner.make_rng(cfg.seed)
    run = strategy.simulate(g, ctrl, adv, cfg.simulate_steps, rng)
    lines = ["step,state,mode,action,labels"]
    for t, s in enumerate(run["path"]):
        act = run["actions"][t] if t < len(run["actions"]) else ""
        mode = run["modes"][t][0]
        lines.append(f"{t},{game.state_token(s)},{mode},{act},{' '.join(sorted(run['labels'][t]))}")
    _write(cfg.out, "trace.csv", "\n".join(lines) + "\n")
    print(f"simulated {cfg.simulate_steps} steps; trace written to {cfg.out / 'trace.csv'}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ltlgames", description="LTL objectives on stochastic games via priority games.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--seed", type=int, help="PRNG seed (Philox-4x64)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--epsilon", type=float, help="reward machine parameter in (0, 1]")
        p.add_argument("--game", help="explicit game file")
        p.add_argument("--grid", help="grid layout file")
        p.add_argument("--automaton", help="HOA automaton file")
        return p

    p = common(sub.add_parser("check-automaton", help="compare an automaton with a formula on bounded lassos"))
    p.add_argument("--formula")
    p.add_argument("--max-stem", type=int, dest="max_stem")
    p.add_argument("--max-loop", type=int, dest="max_loop")
    p = common(sub.add_parser("solve", help="exact maximin value by strategy enumeration"))
    p.add_argument("--cap", type=int, help="largest number of strategy pairs to enumerate")
    p = common(sub.add_parser("learn", help="minimax-Q on the priority game"))
    p.add_argument("--episodes", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--random-start-episodes", type=int, dest="random_start_episodes")
    p.add_argument("--parallel-seeds", type=int, default=1, dest="parallel_seeds",
                   help="train seeds seed..seed+n-1 in worker processes")
    for name in ("render", "simulate"):
        p = common(sub.add_parser(name, help=f"{name} a controller strategy"))
        p.add_argument("--strategy", help="controller strategy file")
        if name == "render":
            p.add_argument("--svg", action="store_true", default=None)
        else:
            p.add_argument("--adversary", help="adversary strategy file (default: worst case)")
            p.add_argument("--steps", type=int, dest="simulate_steps")
    return ap


_COMMANDS = {
    "check-automaton": cmd_check_automaton,
    "solve": cmd_solve,
    "render": cmd_render,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config = args.pop("config")
    parallel = args.pop("parallel_seeds", 1)
    try:
        cfg = load_config(config, args)
        if command == "learn":
            if parallel < 1:
                raise UsageError("--parallel-seeds must be at least 1")
            return cmd_learn(cfg, parallel)
        return _COMMANDS[command](cfg)
    except UsageError as err:
        print(f"ltlgames {command}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError, ltl.LTLSyntaxError) as err:
        print(f"ltlgames {command}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as err:
        print(f"ltlgames {command}: {err}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
