"""Train with the min-max membership privacy defense and re-run the attack.

The defender plays a game: an inner adversary is trained to distinguish the
model's outputs on its training set from outputs on a disjoint reference set,
and the classifier is penalized by lambda times that adversary's gain. At the
game's equilibrium the two output distributions coincide and any attacker is
reduced to coin flipping.

Runtime: a few minutes (the inner adversary takes several passes per epoch).
"""

from advreg.attack import AttackTrainConfig, attack_report, train_external_attacker
from advreg.data import split_dataset, synth_generate
from advreg.metrics import distribution_gap, model_accuracy
from advreg.models import build_attack_model, build_classifier
from advreg.theory import equilibrium_check, harvest_discrete_game
from advreg.trainer import GameConfig, train_minmax

LAM = 3.0

dataset = synth_generate(k=10, d=60, per_class=300, flip_prob=0.4, seed=0)
split = split_dataset(dataset, dict(train=1000, reference=1000, adversary_members=250,
                                    adversary_nonmembers=500, eval_nonmembers=500),
                      seed=0)

print(f"adversarial training with lambda = {LAM} ...")
classifier = build_classifier(60, 10, [256, 128], seed=0)
inner_adversary = build_attack_model(10, seed=1)
cfg = GameConfig(lam=LAM, outer_epochs=50, batch_size=64,
                 attack_steps_per_epoch=124, seed=0)
classifier, inner_adversary, trace = train_minmax(cfg, split, classifier,
                                                  inner_adversary)

train_acc = model_accuracy(classifier, split.train)
test_acc = model_accuracy(classifier, split.eval_nonmembers)
print(f"train accuracy {train_acc:.3f} vs test accuracy {test_acc:.3f} "
      f"(gap {train_acc - test_acc:.3f})")
print(f"inner adversary's final gain: {trace.inference_gain[-1]:+.4f} "
      f"(log 1/2 = -0.6931 means it learned nothing)")

print("\nre-running the external attack against the defended model ...")
attacker = train_external_attacker(
    classifier, split.adversary_members, split.adversary_nonmembers,
    AttackTrainConfig(epochs=100, batch_size=64, seed=0),
    train_provenance=split.train.provenance,
)
report = attack_report(attacker, classifier, split.unknown_members(),
                       split.eval_nonmembers)
print(f"attack accuracy: {report['attack_accuracy']:.3f}  (0.5 = chance)")

print("\noutput distributions after the defense:")
for stat in ("prediction_accuracy", "normalized_entropy"):
    gap = distribution_gap(classifier, split.train, split.eval_nonmembers, stat)
    print(f"  {stat:22s}: max per-bin frequency gap {gap.max_gap:.3f}, "
          f"mean {gap.avg_gap:.3f}")

# The tolerance absorbs histogram sampling noise: the empirical TV distance
# of two identical distributions sampled 1000/500 times into 20 bins is
# already on the order of 0.1.
game = harvest_discrete_game(classifier, split.train, split.eval_nonmembers)
ok, diag = equilibrium_check(game, tolerance=0.15)
print(f"\nempirical equilibrium check (TV tolerance 0.15): {ok}")
print(f"  tv_distance {diag['tv_distance']:.4f}, "
      f"optimal attacker gain {diag['optimal_gain']:+.4f}")
