"""Command-line front end.

    contestlab simulate     --config <json> [--seed N] [--out DIR]
    contestlab estimate     --config <json> [--panel CSV] [--seed N] [--out DIR]
    contestlab model-curves --variant V [--alpha A] [--multiplier M]
                            [--theta-max T] [--out DIR]
    contestlab calibrate    [--config <json>] [--seed N] [--out DIR]
    contestlab reproduce    [--seed N] [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 data error, 4 acceptance
failure. CONTESTLAB_OUT overrides the output directory. Runs are
deterministic given (config, seed); --threads is accepted for interface
compatibility and recorded, computation is single-threaded either way.
"""

import argparse
import os
import sys
from pathlib import Path

from . import acceptance
from . import scenarios as sc
from .contests import BASELINE, CHOKING, REWARD_SCALED, REWARD_THETA
from .estimators import EstimationError
from .tournament import PanelFormatError, export_panel, import_panel, run_tournaments

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_ACCEPTANCE = 4


def _load_config(args, default_scenario=None):
    if args.config:
        config = sc.ScenarioConfig.from_json(args.config)
    elif default_scenario:
        config = sc.ScenarioConfig(default_scenario)
    else:
        raise sc.ConfigError("--config is required for this command")
    if args.seed is not None:
        config.seed = args.seed
    out = os.environ.get("CONTESTLAB_OUT") or args.out
    if out:
        config.out_dir = out
    return config


def cmd_simulate(args):
    config = _load_config(args, default_scenario="calibration")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panel = run_tournaments(config.build_dgp(), config.build_effects(), config.seed)
    path = out / f"panel_{config.scenario}_seed{config.seed}.csv"
    export_panel(panel, path)
    print(f"wrote {path} ({len(panel)} contests)")
    return EXIT_OK


def cmd_estimate(args):
    config = _load_config(args)
    if args.panel:
        # Scenario runners resimulate by default; panel-driven estimation is
        # supported for the regression tables.
        if config.scenario not in ("table2", "table3", "table4", "table5", "table6"):
            raise sc.ConfigError(
                "--panel is only supported for the table scenarios")
        panel = import_panel(args.panel)
        sc.RUNNERS[config.scenario](config, panel=panel)
    else:
        sc.run_scenario(config)
    print(f"scenario {config.scenario} written under "
          f"{Path(config.out_dir) / config.scenario}")
    return EXIT_OK


def cmd_model_curves(args):
    variant = {"baseline": BASELINE, "reward-scaled": REWARD_SCALED,
               "reward-theta": REWARD_THETA, "choking": CHOKING}[args.variant]
    out = Path(os.environ.get("CONTESTLAB_OUT") or args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    config = sc.ScenarioConfig("fig5", seed=args.seed or 42, out_dir=str(out))
    from .contests import choking_peak_theta, effort_curve, write_curve_csv
    from . import svg
    kwargs = {}
    if variant in (REWARD_THETA, CHOKING):
        kwargs["alpha"] = args.alpha
    if variant == REWARD_SCALED:
        kwargs["reward_multiplier"] = args.multiplier
    curve = effort_curve(variant, theta_max=args.theta_max, n_points=201, **kwargs)
    csv_path = out / f"curve_{args.variant}.csv"
    write_curve_csv(csv_path, curve)
    series = [
        {"x": curve[:, 0].tolist(), "y": curve[:, 1].tolist(),
         "label": "low-ability effort"},
        {"x": curve[:, 0].tolist(), "y": curve[:, 2].tolist(),
         "label": "high-ability effort", "dashed": True},
    ]
    title = f"equilibrium effort: {args.variant}"
    if variant == CHOKING and args.alpha > 0:
        title += f" (high-effort peak at {choking_peak_theta(args.alpha):.4f})"
    svg.line_chart(out / f"curve_{args.variant}.svg", series, title=title,
                   x_label="relative skill of the high player", y_label="effort")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_calibrate(args):
    config = _load_config(args, default_scenario="calibration")
    report = sc.run_calibration(config)
    for name, check in report["checks"].items():
        flag = "PASS" if check["ok"] else "FAIL"
        print(f"{flag}  {name}: {check['value']:.4f} "
              f"(target {check['target']} ± {check['tolerance']})")
    return EXIT_OK if report["all_ok"] else EXIT_ACCEPTANCE


def cmd_reproduce(args):
    seed = args.seed if args.seed is not None else 42
    out = os.environ.get("CONTESTLAB_OUT") or args.out or "out"
    report = acceptance.run_all(seed=seed, out_dir=out)
    print("report written to", Path(out) / "acceptance_report.json")
    return EXIT_OK if report["all_passed"] else EXIT_ACCEPTANCE


def build_parser():
    parser = argparse.ArgumentParser(prog="contestlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario config JSON")
        p.add_argument("--seed", type=int, help="master seed (64-bit unsigned)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="accepted for compatibility; results do not depend on it")

    p = sub.add_parser("simulate", help="simulate a panel and write CSV")
    common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("estimate", help="run a scenario's estimator set")
    common(p)
    p.add_argument("--panel", help="existing panel CSV instead of resimulating")
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("model-curves", help="equilibrium-effort curves")
    common(p)
    p.add_argument("--variant", required=True,
                   choices=["baseline", "reward-scaled", "reward-theta", "choking"])
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--multiplier", type=float, default=2.0)
    p.add_argument("--theta-max", type=float, default=2.0)
    p.set_defaults(fn=cmd_model_curves)

    p = sub.add_parser("calibrate", help="check descriptive moments")
    common(p)
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("reproduce", help="run the full acceptance suite")
    common(p)
    p.set_defaults(fn=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except sc.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PanelFormatError, EstimationError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
