"""Command-line experiment runner.

`mpshrink run CONFIG` executes the scenarios of an INI-style config and
writes one CSV (and optionally one SVG risk plot) per scenario.
`mpshrink verify` runs the derivative/identity oracle suite and prints a
pass/fail table.

Config format, one section per scenario plus an optional [global] section:

    [global]
    master_seed = 20120301
    replicates = 100000
    emit_svg = true

    [p10-n5-spiked]
    p = 10
    n = 5
    cov = spiked            # spiked | ar | block | identity
    estimators = usual, js, js+

Scenario keys: p, n, cov, rho (ar/block only), estimators, theta_norms,
theta_direction, replicates, seed. Estimator tokens are `usual`, `js` and
`js+`, each optionally with an explicit constant as in `js:0.5` (the default
constant is the midpoint of the admissible interval). Unknown keys are
rejected with their line number.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import identities, risk, svgchart
from .estimators import JamesStein, PositivePartJS, Usual, js_default_constant
from .randgen import Autoregressive, BlockDiagonal, Identity, Spiked

CSV_HEADER = "scenario,p,n,cov_model,estimator,theta_norm,replicates,risk,std_err"

_SECTION_RE = re.compile(r"^\[([A-Za-z0-9._-]+)\]$")
_GLOBAL_KEYS = ("master_seed", "replicates", "emit_svg", "output_dir")
_SCENARIO_KEYS = (
    "p",
    "n",
    "cov",
    "rho",
    "estimators",
    "theta_norms",
    "theta_direction",
    "replicates",
    "seed",
)


class ConfigError(ValueError):
    """Config parse or validation failure, carrying a line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class RunManifest:
    """Everything `run` needs: scenarios, output location, seed, plot flag."""

    scenarios: list
    output_dir: str = "out"
    emit_svg: bool = False
    master_seed: int = 0


def _split_sections(text: str):
    """(name, name_line, {key: (value, line)}) triples, in file order."""
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        m = _SECTION_RE.match(line)
        if m:
            current = (m.group(1), lineno, {})
            sections.append(current)
            continue
        if line.startswith("["):
            raise ConfigError(
                "malformed section header (names may use letters, digits, '.', '_', '-')",
                lineno,
            )
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key before any [section] header", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError("empty key", lineno)
        if key in current[2]:
            raise ConfigError(f"duplicate key '{key}'", lineno)
        current[2][key] = (value, lineno)
    return sections


def _parse_int(value: str, field: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{field}: expected an integer, got {value!r}", line) from None


def _parse_bool(value: str, field: str, line: int) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{field}: expected true/false, got {value!r}", line)


def _parse_floats(value: str, field: str, line: int) -> list[float]:
    out = []
    for tok in value.split(","):
        tok = tok.strip()
        if not tok:
            raise ConfigError(f"{field}: empty entry in list", line)
        try:
            out.append(float(tok))
        except ValueError:
            raise ConfigError(f"{field}: expected a number, got {tok!r}", line) from None
    return out


def _parse_estimators(value: str, p: int, n: int, line: int) -> list:
    specs = []
    for tok in value.split(","):
        tok = tok.strip()
        if not tok:
            raise ConfigError("estimators: empty entry in list", line)
        base, _, arg = tok.partition(":")
        constant = None
        if arg:
            try:
                constant = float(arg)
            except ValueError:
                raise ConfigError(
                    f"estimators: bad constant in {tok!r}", line
                ) from None
        if base == "usual":
            if constant is not None:
                raise ConfigError("estimators: 'usual' takes no constant", line)
            specs.append(Usual())
        elif base == "js":
            specs.append(JamesStein(constant if constant is not None else js_default_constant(p, n)))
        elif base == "js+":
            specs.append(
                PositivePartJS(constant if constant is not None else js_default_constant(p, n))
            )
        else:
            raise ConfigError(
                f"estimators: unknown estimator {tok!r} (use usual, js, js+)", line
            )
    return specs


def _build_scenario(name: str, name_line: int, keys: dict, defaults: dict) -> risk.ScenarioConfig:
    unknown = set(keys) - set(_SCENARIO_KEYS)
    if unknown:
        field = sorted(unknown)[0]
        raise ConfigError(f"unknown key '{field}'", keys[field][1])
    for required in ("p", "n", "cov"):
        if required not in keys:
            raise ConfigError(f"scenario '{name}': missing required key '{required}'", name_line)
    p = _parse_int(keys["p"][0], "p", keys["p"][1])
    n = _parse_int(keys["n"][0], "n", keys["n"][1])
    if min(p, n) < 3:
        raise ConfigError(f"min(p, n) must be at least 3, got p={p}, n={n}", name_line)

    cov_value, cov_line = keys["cov"]
    rho = None
    if "rho" in keys:
        raw, rho_line = keys["rho"]
        try:
            rho = float(raw)
        except ValueError:
            raise ConfigError(f"rho: expected a number, got {raw!r}", rho_line) from None
        if not abs(rho) < 1.0:
            raise ConfigError(f"rho: |rho| < 1 required, got {rho}", rho_line)
    if cov_value == "spiked":
        cov = Spiked()
    elif cov_value in ("ar", "autoregressive"):
        cov = Autoregressive(rho if rho is not None else 0.5)
    elif cov_value in ("block", "block-diagonal"):
        cov = BlockDiagonal(rho if rho is not None else 0.5)
    elif cov_value == "identity":
        cov = Identity()
    else:
        raise ConfigError(
            f"cov: unknown covariance {cov_value!r} (use spiked, ar, block, identity)", cov_line
        )
    if rho is not None and cov_value not in ("ar", "autoregressive", "block", "block-diagonal"):
        raise ConfigError("rho: only meaningful for ar or block covariances", keys["rho"][1])

    if "estimators" in keys:
        est = _parse_estimators(keys["estimators"][0], p, n, keys["estimators"][1])
    else:
        est = [Usual(), JamesStein(js_default_constant(p, n))]

    theta_norms = None
    if "theta_norms" in keys:
        theta_norms = _parse_floats(keys["theta_norms"][0], "theta_norms", keys["theta_norms"][1])
    theta_direction = None
    if "theta_direction" in keys:
        theta_direction = _parse_floats(
            keys["theta_direction"][0], "theta_direction", keys["theta_direction"][1]
        )
    replicates = defaults["replicates"]
    if "replicates" in keys:
        replicates = _parse_int(keys["replicates"][0], "replicates", keys["replicates"][1])
    seed = defaults["master_seed"]
    if "seed" in keys:
        seed = _parse_int(keys["seed"][0], "seed", keys["seed"][1])

    try:
        return risk.ScenarioConfig(
            p=p,
            n=n,
            cov=cov,
            estimators=est,
            theta_direction=theta_direction,
            theta_norms=theta_norms,
            replicates=replicates,
            master_seed=seed,
            name=name,
        )
    except ValueError as exc:
        raise ConfigError(f"scenario '{name}': {exc}", name_line) from None


def parse_config(text: str) -> RunManifest:
    """Parse config text into a RunManifest; raises ConfigError on problems."""
    sections = _split_sections(text)
    defaults = {"master_seed": 0, "replicates": 10_000}
    manifest = RunManifest(scenarios=[])
    scenario_sections = []
    for name, line, keys in sections:
        if name == "global":
            unknown = set(keys) - set(_GLOBAL_KEYS)
            if unknown:
                field = sorted(unknown)[0]
                raise ConfigError(f"unknown key '{field}'", keys[field][1])
            if "master_seed" in keys:
                defaults["master_seed"] = _parse_int(
                    keys["master_seed"][0], "master_seed", keys["master_seed"][1]
                )
            if "replicates" in keys:
                defaults["replicates"] = _parse_int(
                    keys["replicates"][0], "replicates", keys["replicates"][1]
                )
            if "emit_svg" in keys:
                manifest.emit_svg = _parse_bool(keys["emit_svg"][0], "emit_svg", keys["emit_svg"][1])
            if "output_dir" in keys:
                manifest.output_dir = keys["output_dir"][0]
        else:
            scenario_sections.append((name, line, keys))
    seen = set()
    for name, line, keys in scenario_sections:
        if name in seen:
            raise ConfigError(f"duplicate scenario name '{name}'", line)
        seen.add(name)
    if not scenario_sections:
        raise ConfigError("config defines no scenarios")
    manifest.master_seed = defaults["master_seed"]
    manifest.scenarios = [
        _build_scenario(name, line, keys, defaults) for name, line, keys in scenario_sections
    ]
    return manifest


def _g10(v: float) -> str:
    return format(v, ".10g")


def _rows_to_csv(rows: list[risk.RiskRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.scenario},{r.p},{r.n},{r.cov_model},{r.estimator},"
            f"{_g10(r.theta_norm)},{r.replicates},{_g10(r.risk)},{_g10(r.std_err)}"
        )
    return "\n".join(lines) + "\n"


def _scenario_svg(cfg: risk.ScenarioConfig, rows: list[risk.RiskRow]) -> str:
    series = []
    order = []
    by_est: dict[str, list[risk.RiskRow]] = {}
    for r in rows:
        if r.estimator not in by_est:
            by_est[r.estimator] = []
            order.append(r.estimator)
        by_est[r.estimator].append(r)
    for label in order:
        pts = by_est[label]
        series.append((label, [r.theta_norm for r in pts], [r.risk for r in pts]))
    return svgchart.line_chart(
        series,
        title=f"{cfg.name} (p={cfg.p}, n={cfg.n})",
        xlabel="|theta|",
        ylabel="risk",
        ref_y=float(cfg.p),
        ref_label=f"risk of X ({cfg.p})",
    )


def run(
    manifest: RunManifest,
    jobs: int = 1,
    replicates_override: int | None = None,
    out_dir: str | None = None,
) -> int:
    """Execute every scenario; one CSV (and optional SVG) per scenario.

    Returns 0 on success. A failing scenario writes a one-line JSON error
    record to stderr and the exit code becomes 1; remaining scenarios still
    run. jobs only changes scheduling, never output bytes.
    """
    target = Path(out_dir if out_dir is not None else manifest.output_dir)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": f"output_dir not writable: {exc}"}) + "\n")
        return 1
    failed = False
    for cfg in manifest.scenarios:
        if replicates_override is not None:
            cfg = replace(cfg, replicates=replicates_override)
        try:
            rows = risk.risk_curve(cfg, jobs=jobs)
            (target / f"{cfg.name}.csv").write_text(_rows_to_csv(rows), encoding="utf-8")
            if manifest.emit_svg:
                (target / f"{cfg.name}.svg").write_text(
                    _scenario_svg(cfg, rows), encoding="utf-8"
                )
        except Exception as exc:  # noqa: BLE001 - every failure becomes a record
            sys.stderr.write(
                json.dumps({"scenario": cfg.name, "error": str(exc)}) + "\n"
            )
            failed = True
            continue
        sys.stderr.write(f"{cfg.name}: wrote {cfg.name}.csv ({len(rows)} rows)\n")
    return 1 if failed else 0


IDENTITY_CSV_HEADER = "identity,analytic,oracle,abs_err,rel_err,tolerance,pass"


def verify(
    only: str | None = None,
    seed: int = 13,
    out_dir: str | None = None,
    mc_replicates: int = 100_000,
    fd_configs: int = 100,
) -> int:
    """Run the identity oracle suite and print one row per identity."""
    try:
        reports = identities.run_default_suite(
            seed=seed, only=only, fd_configs=fd_configs, mc_replicates=mc_replicates
        )
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    name_w = max(len(r.name) for r in reports)
    print(f"{'identity':<{name_w}}  {'analytic':>13} {'oracle':>13} "
          f"{'abs_err':>10} {'rel_err':>10} {'tol':>9}  result")
    for r in reports:
        print(
            f"{r.name:<{name_w}}  {r.analytic:>13.6g} {r.oracle:>13.6g} "
            f"{r.abs_err:>10.3g} {r.rel_err:>10.3g} {r.tolerance:>9.3g}  "
            f"{'PASS' if r.passed else 'FAIL'}"
        )
    if out_dir is not None:
        target = Path(out_dir)
        target.mkdir(parents=True, exist_ok=True)
        lines = [IDENTITY_CSV_HEADER]
        for r in reports:
            lines.append(
                f"{r.name},{_g10(r.analytic)},{_g10(r.oracle)},{_g10(r.abs_err)},"
                f"{_g10(r.rel_err)},{_g10(r.tolerance)},{'true' if r.passed else 'false'}"
            )
        (target / "identities.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0 if all(r.passed for r in reports) else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mpshrink",
        description="Risk simulations and identity checks for Moore-Penrose shrinkage estimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the scenarios of a config file")
    p_run.add_argument("config", help="path to an INI-style scenario config")
    p_run.add_argument("--out", default=None, help="output directory (default: from config)")
    p_run.add_argument(
        "--replicates", type=int, default=None, help="override replicates for every scenario"
    )
    p_run.add_argument(
        "--jobs", type=int, default=1, help="worker threads (never changes output bytes)"
    )

    p_verify = sub.add_parser("verify", help="run the derivative/identity oracle suite")
    p_verify.add_argument("--only", default=None, help="run a single identity by name")
    p_verify.add_argument("--seed", type=int, default=13, help="master seed for the suite")
    p_verify.add_argument("--out", default=None, help="also write identities.csv here")
    p_verify.add_argument(
        "--replicates",
        type=int,
        default=100_000,
        help="replicates for the Monte-Carlo identities",
    )
    p_verify.add_argument(
        "--configs",
        type=int,
        default=100,
        help="random configurations per (p, n) for the finite-difference sweeps",
    )

    args = parser.parse_args(argv)
    if args.command == "run":
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            sys.stderr.write(f"error: cannot read config: {exc}\n")
            return 2
        try:
            manifest = parse_config(text)
        except ConfigError as exc:
            sys.stderr.write(f"error: {exc}\n")
            return 2
        if args.jobs < 1:
            sys.stderr.write("error: --jobs must be at least 1\n")
            return 2
        if args.replicates is not None and args.replicates < 1:
            sys.stderr.write("error: --replicates must be at least 1\n")
            return 2
        return run(
            manifest,
            jobs=args.jobs,
            replicates_override=args.replicates,
            out_dir=args.out,
        )
    if args.command == "verify":
        return verify(
            only=args.only,
            seed=args.seed,
            out_dir=args.out,
            mc_replicates=args.replicates,
            fd_configs=args.configs,
        )
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
