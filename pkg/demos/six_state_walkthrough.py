"""
Walk through the whole pipeline on the six-state example game.

The controller picks at s0 between a risky shortcut and waiting; the
adversary picks a detour at s1.  The task is ``(F G a & G F b) | F G c``.

    python demos/six_state_walkthrough.py
"""

from ltlgames import (
    LearnSchedule, Prm, build_priority, build_product, discounted_value_vi, evaluate_worst_case,
    induce_strategy, load_game, load_hoa, make_rng, minimax_q_train, parity_value_exact, simulate,
)
from importlib.resources import files

from ltlgames.cli import load_config
from ltlgames.strategy import dump_strategy

cfg = load_config(files("ltlgames") / "data" / "configs" / "six_state.ini")
game = load_game(cfg.game)
dpa = load_hoa(cfg.automaton)
print(f"game: {game.n_states} states, automaton: {dpa.n_states} states, {dpa.k} colors")

# %% exact answer by enumerating pure memoryless pairs on the product
product = build_product(game, dpa)
exact = parity_value_exact(product)
print(f"product: {product.n_states} states, maximin probability {exact.value:.4f}")

# %% the discounted surrogate approaches it as eps shrinks
for eps in (0.1, 0.01, 0.001):
    pg = build_priority(product, Prm(dpa.k, eps))
    vi = discounted_value_vi(pg, tol=1e-8)
    print(f"eps={eps:<6} discounted value {vi.values[pg.initial]:.4f}")

# %% model-free: minimax-Q on the priority game, then read off a strategy
pg = build_priority(product, Prm(dpa.k, 0.01))
res = minimax_q_train(pg, LearnSchedule(episodes=4096, steps=1024, random_start_episodes=3584, seed=1))
ctrl, adv = induce_strategy(pg, res.choice)
print(f"learned controller: {len(ctrl.modes)} modes, worst case {evaluate_worst_case(game, dpa, ctrl):.4f}")
print(dump_strategy(ctrl).splitlines()[0:4])

# %% one rollout of the learned pair
run = simulate(game, ctrl, adv, 12, make_rng(7))
print(" -> ".join(f"{s}{sorted(l) if l else ''}" for s, l in zip(run["path"], run["labels"])))
print("first modes:", [m[0] for m in run["modes"][:4]])
