# %% [markdown]
# # Ablation on a synthetic imbalanced graph
#
# Full pipeline vs. each stage switched off, 5 seeds each.

# %%
import dataclasses

from structbal.data import Dataset
from structbal.pipeline import ExperimentConfig, run_experiment
from structbal.sbm import SBMConfig, gaussian_features, generate_sbm

g, y = generate_sbm(SBMConfig(500, 50, 0.05, 0.005), 0)
ds = Dataset(graph=g, features=gaussian_features(y, 8, 1.5, 1), labels=y)
base = ExperimentConfig(per_class_train=20, per_class_val=5, per_class_test=25, rho=0.5)

# %%
variants = {
    "full": base,
    "no SE": dataclasses.replace(base, use_se=False),
    "no RD": dataclasses.replace(base, use_rd=False),
    "vanilla": dataclasses.replace(base, use_se=False, use_rd=False),
}
print(f"{'variant':8s} {'macro-F1':>9s} {'minority F1':>12s} {'R':>6s}")
for name, cfg in variants.items():
    rep = run_experiment(ds, cfg)
    print(f"{name:8s} {rep.mean('macro_f1'):9.3f} {rep.mean('f1_class_1'):12.3f} "
          f"{rep.mean('r_ratio'):6.3f}")

# %%
# Smaller minority budgets.
for rho in (1.0, 0.5, 0.25, 0.1):
    sb = run_experiment(ds, dataclasses.replace(base, rho=rho))
    va = run_experiment(ds, dataclasses.replace(base, rho=rho, use_se=False, use_rd=False))
    print(f"rho={rho:<5} full {sb.mean('macro_f1'):.3f}  vanilla {va.mean('macro_f1'):.3f}")
