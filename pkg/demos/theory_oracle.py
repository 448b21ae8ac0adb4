"""What can the best possible membership attacker achieve?

On a finite outcome alphabet the attacker's problem has a closed form: the
best response to member distribution p and non-member distribution p' is
h*(o) = p(o) / (p(o) + p'(o)). This script builds a few discrete games,
compares the closed form against a brute-force grid search, and shows that
the gain collapses to log(1/2) exactly when the two distributions coincide.
"""

import numpy as np

from advreg.theory import (
    RANDOM_GUESS_GAIN,
    DiscreteGame,
    brute_force_attacker,
    discrete_gain,
    equilibrium_check,
    optimal_attacker,
    total_variation,
)

rng = np.random.default_rng(0)

print("=== separated distributions: the attacker wins ===")
game = DiscreteGame(p_member=[0.7, 0.2, 0.1], p_nonmember=[0.1, 0.2, 0.7])
h_star = optimal_attacker(game)
print(f"optimal attacker      : {np.round(h_star, 4)}")
print(f"optimal gain          : {discrete_gain(game, h_star):+.6f}")
print(f"random-guess gain     : {RANDOM_GUESS_GAIN:+.6f}")
print(f"total variation       : {total_variation(game):.4f}")

h_grid, gain_grid = brute_force_attacker(game)
print(f"brute force agrees    : max |h* - h_grid| = {np.max(np.abs(h_star - h_grid)):.2e}")

print()
print("=== identical distributions: membership is invisible ===")
p = rng.dirichlet(np.ones(5))
game = DiscreteGame(p, p.copy())
h_star = optimal_attacker(game)
ok, diag = equilibrium_check(game, tolerance=1e-9)
print(f"optimal attacker      : {np.round(h_star, 4)}  (0.5 everywhere)")
print(f"gain at equilibrium   : {discrete_gain(game, h_star):+.6f}  (= log 1/2)")
print(f"equilibrium check     : {ok}, diagnostics {diag}")

print()
print("=== the optimal attacker dominates random ones ===")
game = DiscreteGame(rng.dirichlet(np.ones(8)), rng.dirichlet(np.ones(8)))
best = discrete_gain(game, optimal_attacker(game))
random_gains = [discrete_gain(game, rng.uniform(0, 1, 8)) for _ in range(1000)]
print(f"closed-form gain      : {best:+.6f}")
print(f"best of 1000 random h : {max(random_gains):+.6f}")
