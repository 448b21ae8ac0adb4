"""Sweep the regularization factor and watch privacy buy utility.

Larger lambda weighs the inner adversary's gain more heavily against
classification loss: attack accuracy falls toward chance while training
accuracy (the memorization headroom) falls with it. This is the
privacy-utility dial of the defense.

Runtime: roughly ten minutes for the full sweep; pass --quick for a
two-point sketch. The same sweep is available from the command line:

    advreg sweep --param lambda --values 0 1 3 10 --output-dir runs/sweep
"""

import sys

from advreg.experiment import ExperimentConfig, run_experiment
from advreg.trainer import GameConfig

QUICK = "--quick" in sys.argv
lambdas = [0.0, 3.0] if QUICK else [0.0, 1.0, 3.0, 10.0]

rows = []
for lam in lambdas:
    cfg = ExperimentConfig(
        output_dir=f"runs/tradeoff/lam{lam:g}",
        run_label=f"lam{lam:g}",
        flip_prob=0.4,
        hidden_sizes=[256, 128],
        attacker_epochs=100,
        game=GameConfig(lam=lam, outer_epochs=60,
                        attack_steps_per_epoch=None if lam == 0 else 155,
                        seed=1),
    )
    print(f"lambda = {lam:g} ...")
    report = run_experiment(cfg)
    rows.append((lam, report))

print(f"\n{'lambda':>8} {'train acc':>10} {'test acc':>9} {'attack acc':>11}")
for lam, report in rows:
    print(f"{lam:>8g} {report['train_accuracy']:>10.3f} "
          f"{report['test_accuracy']:>9.3f} {report['attack_accuracy']:>11.3f}")
print("\nfull artifacts (report.json, trace.csv, histograms) are under runs/tradeoff/")
