"""Seminorms of (u - eps)^+ under refinement, and of u itself.

Run: python3 demos/05_boundary_sense.py
"""
from fraclap.verification import check_boundary_sense, solve_family

for s, gamma in ((0.5, 0.5), (0.5, 4.0), (0.75, 4.0)):
    rep = check_boundary_sense(solve_family(s, gamma), epsilons=(0.05, 0.1, 0.2))
    verdict = "within" if rep.passed else "exceeds"
    print(f"\ns={s}, gamma={gamma}: worst spread {rep.worst_slack:.2%} ({verdict} the 5% budget)")
    for row in rep.refinement_table:
        print("  ", "  ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}"
                              for k, v in row.items()))
    print("   growth of [u] itself:", f"{rep.data['seminorm_u_growth']:+.2%}")
