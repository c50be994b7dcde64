"""
Learn controllers for the two grid-world tasks and draw where they end up.

Surveillance: keep visiting the monitoring targets of one zone and never
leave it.  Nursery: enter the room, tell the adult once, then alternate
between the baby and the charger while avoiding the danger cell.  Both use
the desk-scale schedule from the shipped configs (a few seconds each).

    python demos/gridworld_case_studies.py
"""

from importlib.resources import files

from ltlgames import (
    LearnSchedule, Prm, build_gridworld, build_priority, build_product, discounted_value_vi, load_grid, load_hoa,
    minimax_q_train, worst_case_value,
)
from ltlgames.cli import load_config, long_run_cells, render_ascii
from ltlgames.strategy import induce_strategy, worst_case_chain

for name in ("surveillance", "nursery"):
    cfg = load_config(files("ltlgames") / "data" / "configs" / f"{name}.ini")
    spec = load_grid(cfg.grid)
    dpa = load_hoa(cfg.automaton)
    pg = build_priority(build_product(build_gridworld(spec), dpa), Prm(dpa.k, cfg.epsilon))
    print(f"== {name}: {cfg.formula}")
    print(f"priority game with {pg.n_states} states")

    # planning baseline: value iteration knows the model
    vi = discounted_value_vi(pg, tol=1e-6)
    print(f"value-iteration controller, worst case {worst_case_value(pg, vi.choice, colors=pg.color):.3f}")

    res = minimax_q_train(pg, cfg.learn_schedule())
    ctrl, _ = induce_strategy(pg, res.choice)
    mc, bottom, v = worst_case_chain(ctrl)
    print(f"learned controller, worst case {float(v[pg.initial]):.3f}; long-run cells in brackets:")
    print(render_ascii(spec, long_run_cells(pg, bottom)))
