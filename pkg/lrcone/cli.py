import argparse
import json
import logging
import math
import os
import sys

from lrcone.bounds import velocity
from lrcone.config import RunConfig, load_config, parse_config
from lrcone.emit import (Table, ASYMPTOTIC_COLUMNS, CURVE_COLUMNS, FRONT_COLUMNS, emit, write_json)
from lrcone.errors import (ConfigParseError, ConfigValidationError, InvalidArgumentError, LrconeError)
from lrcone.lightcone import (ConeParameters, asymptotic_check, default_epsilon, empirical_front, fit_power_law,
                              front_curve)
from lrcone.model import admissible_power_law_profile
from lrcone.simulate_pipe import analytic_bounds, assumption_a_table, plan_sweep, prepare_model, run_sweep
from lrcone import simulate_pipe, verify_pipe

# --- Configuration ---
CONFIG = {
    # Used when --config is omitted: an 8-site Ising chain with (1+r)^-3 couplings.
    "DEFAULT_RUN": {
        "lattice": {"kind": "chain", "size": 8},
        "interaction": {"type": "power_law_two_body", "C1": 1.0, "alpha": 2.0},
    },
}
# --- End Configuration ---


def _load(args) -> RunConfig:
    if args.config:
        config = load_config(args.config)
    else:
        config = parse_config(json.dumps(CONFIG["DEFAULT_RUN"]))
    updates = {}
    if args.out:
        updates["output"] = config.output.model_copy(update={"directory": args.out})
    bound_updates = {}
    if args.mode:
        bound_updates["constant_mode"] = args.mode
    if args.refined:
        bound_updates["refined_exponent"] = True
    if bound_updates:
        updates["bound"] = config.bound.model_copy(update=bound_updates)
    return config.model_copy(update=updates) if updates else config


def run_model(config: RunConfig, args) -> int:
    model = prepare_model(config)
    table = assumption_a_table(model)
    print(f"Lattice: {model.space.kind}, {model.space.n_sites} sites, growth g(r) = {model.growth.C:.6g}(1+r)^{model.D:g}")
    print("      R            f(R)")
    for R, f in table.rows:
        print(f"  {R:>8.4g}   {f:.10g}")
    print(f"C0 = {model.C0:.10g}")
    print(f"v  = {velocity(model.C0):.10g}")
    emit(table, config.output.formats, config.output.directory)
    print(f"   Results written to: {config.output.directory}")
    return 0


def run_simulate(config: RunConfig, args) -> int:
    return simulate_pipe.main(config, workers=args.workers, out_dir=config.output.directory,
                              progress=not args.no_progress)


def run_bound(config: RunConfig, args) -> int:
    table = analytic_bounds(config)
    emit(table, config.output.formats, config.output.directory)
    print("\n--- Bound Tables Complete ---")
    print(f"✅ Evaluated {len(table.rows)} bound rows.")
    print(f"   Results written to: {config.output.directory}")
    print("-----------------------")
    return 0


def run_lightcone(config: RunConfig, args) -> int:
    out_dir = config.output.directory
    model = prepare_model(config)
    alpha = config.interaction.alpha
    if alpha is None:
        raise InvalidArgumentError("The light-cone analysis needs a power-law alpha")
    params = ConeParameters.from_model(model.D, alpha, config.bound.lam, velocity(model.C0))
    print(f"kappa={params.kappa:.6g}, eta={params.eta:.6g}, gamma={params.gamma:.6g}, "
          f"lambda={params.lam:g}, v={params.v:.6g}")
    t_grid = config.verify.lightcone_t

    curve = Table("curve", CURVE_COLUMNS)
    for point in front_curve(params, t_grid):
        curve.append(point.t, point.r_max, point.v_g, point.v_g_paper)
    emit(curve, config.output.formats, out_dir)

    C_prime = config.bound.C_prime or admissible_power_law_profile(model.interaction, alpha).C_prime
    asymptotic = Table("asymptotic", ASYMPTOTIC_COLUMNS)
    for row in asymptotic_check(params, t_grid, model.growth, model.shell_growth, C_prime):
        asymptotic.append(row.t, row.r, row.R, row.log_term1, row.log_term2, row.log_term3, row.term2_limit)
    emit(asymptotic, config.output.formats, out_dir)

    rows = run_sweep(config, workers=args.workers, progress=not args.no_progress, model=model)
    plan = plan_sweep(config, model)
    B_norm = max(B.norm for B in plan.B_by_site.values())
    epsilon = config.bound.epsilon or default_epsilon(plan.A.norm, B_norm)
    front = empirical_front([(row.t, row.r, row.measured) for row in rows], epsilon)
    front_table = Table("front", FRONT_COLUMNS)
    for record in front:
        front_table.append(record.t, record.r_star, record.epsilon)
    emit(front_table, config.output.formats, out_dir)

    payload = {"epsilon": epsilon, "expected_exponent": 1.0 + params.gamma,
               "saturated_rows": sum(1 for record in front if record.saturated)}
    try:
        fit = fit_power_law(front)
        payload.update(exponent=fit.exponent, prefactor=fit.prefactor, residual=fit.residual,
                       points_used=fit.points_used)
    except InvalidArgumentError as e:
        print(f"⚠️ No power-law fit: {e}")
        payload.update(exponent=math.nan, prefactor=math.nan, residual=math.nan, points_used=0)
    write_json(payload, os.path.join(out_dir, "fit.json"))

    print("\n--- Light Cone Complete ---")
    print(f"✅ Front of {len(front)} times, fitted exponent {payload['exponent']:.6g} "
          f"(analytic {payload['expected_exponent']:.6g}).")
    if payload["saturated_rows"]:
        print(f"⚠️ {payload['saturated_rows']} rows sit on the lattice edge and were left out of the fit.")
    print(f"   Results written to: {out_dir}")
    print("-----------------------")
    return 0


def run_verify(config: RunConfig, args) -> int:
    _, code = verify_pipe.verify_all(config, workers=args.workers, out_dir=config.output.directory,
                                     progress=not args.no_progress)
    return code


COMMANDS = {
    "model": run_model,
    "simulate": run_simulate,
    "bound": run_bound,
    "lightcone": run_lightcone,
    "verify": run_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrcone",
        description="Simulate long-range spin models and check Lieb-Robinson bounds against exact dynamics.",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    parser.add_argument("command", choices=sorted(COMMANDS),
                        help="model:     Print f(R), C0 and v for the configured interaction.\n"
                             "simulate:  Sweep exact commutator norms against the three-term bound.\n"
                             "bound:     Tabulate the three-term bound without dynamics.\n"
                             "lightcone: Exponents, r_max/v_g curves and the empirical front.\n"
                             "verify:    Run the full verification campaign.")
    parser.add_argument("--config", "-c", type=str, help="Path to the JSON run configuration.")
    parser.add_argument("--workers", "-w", type=int, help="Worker threads (default: all CPUs).")
    parser.add_argument("--out", "-o", type=str, help="Output directory (overrides output.directory).")
    parser.add_argument("--mode", choices=["paper_form", "numeric_tight", "both"],
                        help="Constant mode of the third bound term.")
    parser.add_argument("--refined", action="store_true",
                        help="Use the unit-shell exponent D-1 in the third bound term.")
    parser.add_argument("--no-progress", action="store_true", help="Hide progress bars.")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log at INFO level.")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    if args.workers is not None and args.workers < 1:
        print("❌ ERROR: --workers must be at least 1.")
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(asctime)s - %(levelname)s - %(name)s: %(message)s')

    try:
        config = _load(args)
    except ConfigParseError as e:
        print(f"❌ ERROR: Malformed configuration: {e}")
        return 2
    except ConfigValidationError as e:
        print(f"❌ ERROR: Invalid configuration: {e}")
        return 2
    except FileNotFoundError:
        print(f"❌ ERROR: Configuration file not found: {args.config}")
        return 2

    try:
        return COMMANDS[args.command](config, args)
    except LrconeError as e:
        print(f"❌ ERROR: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
