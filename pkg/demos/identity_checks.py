"""The identity suite at reduced settings.

Runs every analytic-versus-oracle check the package ships: derivative
formulas against central finite differences, the unbiased-risk assembly
against its algebraic rearrangement, and the two expectation identities
against Monte-Carlo averages. Settings here are scaled down so the demo
finishes in seconds; `mpshrink verify` runs the full-size version.

Run:  python3 demos/identity_checks.py
"""

from mpshrink import run_default_suite

reports = run_default_suite(seed=13, fd_configs=20, mc_replicates=20_000)

width = max(len(r.name) for r in reports)
print(f"{'identity':{width}s} {'analytic':>12s} {'oracle':>12s} {'rel err':>10s} {'tol':>9s}  verdict")
for r in reports:
    verdict = "PASS" if r.passed else "FAIL"
    print(
        f"{r.name:{width}s} {r.analytic:12.5g} {r.oracle:12.5g} "
        f"{r.rel_err:10.2e} {r.tolerance:9.1e}  {verdict}"
    )

print()
if all(r.passed for r in reports):
    print("all identities hold at these settings")
else:
    failed = ", ".join(r.name for r in reports if not r.passed)
    print(f"FAILED: {failed}")
    raise SystemExit(1)
