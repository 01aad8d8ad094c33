"""Command-line interface.

Subcommands:

* ``splitspec run CONFIG`` executes a scenario described by a JSON config.
* ``splitspec spectrum`` computes one state's split spectrum directly.
* ``splitspec sweep-disorder`` is a shortcut for the disorder scenario.
* ``splitspec rf-check`` is a shortcut for the RF overlay scenario.

BLAS threading is pinned to one thread per worker (unless the caller set
the environment variables already) so that reruns with any ``--threads``
value produce byte-identical output files.
"""

import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse
import dataclasses
import sys


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    parser.add_argument("--threads", type=int, default=None, help="worker pool size")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format (default csv)")
    parser.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitspec",
        description="Split spectroscopy of spin-1/2 chains by exact diagonalization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a JSON config file")
    p_run.add_argument("config", help="path to the JSON configuration")
    _add_common(p_run)

    p_spec = sub.add_parser("spectrum", help="split spectrum of a single eigenstate")
    p_spec.add_argument("--model", choices=("xy", "rf"), default="xy")
    p_spec.add_argument("--L", type=int, required=True)
    p_spec.add_argument("--J", type=float, default=1.0)
    p_spec.add_argument("--alpha", type=float, default=0.0)
    p_spec.add_argument("--h", type=float, default=0.0, help="transverse field (xy)")
    p_spec.add_argument("--H", type=float, default=1.0, help="disorder half-width (rf)")
    p_spec.add_argument("--realization", type=int, default=0)
    p_spec.add_argument("--state", choices=("gs", "mid"), default="gs")
    p_spec.add_argument("--eta", type=float, default=None,
                        help="emit a Lorentzian-broadened curve of this width")
    _add_common(p_spec)

    p_dis = sub.add_parser("sweep-disorder", help="disorder-averaged entropies")
    p_dis.add_argument("--sizes", default="8,10,12", help="comma-separated chain lengths")
    p_dis.add_argument("--H-values", dest="h_values", default="1,5",
                       help="comma-separated disorder half-widths")
    p_dis.add_argument("--J", type=float, default=1.0)
    p_dis.add_argument("--realizations", type=int, default=20)
    p_dis.add_argument("--states-per-realization", type=int, default=20)
    p_dis.add_argument("--window", default="0.45,0.55",
                       help="normalized energy window lo,hi")
    _add_common(p_dis)

    p_rf = sub.add_parser("rf-check", help="RF response vs broadened split spectrum")
    p_rf.add_argument("--L", type=int, default=5)
    p_rf.add_argument("--J", type=float, default=1.0)
    p_rf.add_argument("--alpha", type=float, default=0.0)
    p_rf.add_argument("--h", type=float, default=1.5)
    p_rf.add_argument("--state", choices=("gs", "mid"), default="gs")
    p_rf.add_argument("--rabi", type=float, default=1e-3)
    p_rf.add_argument("--t-final", type=float, default=60.0)
    p_rf.add_argument("--dt", type=float, default=0.02)
    p_rf.add_argument("--freq-step", type=float, default=0.05)
    _add_common(p_rf)
    return parser


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text)


def _run_config(cfg, args):
    from . import experiments

    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.threads is not None:
        cfg = dataclasses.replace(cfg, threads=args.threads)
    result = experiments.run_experiment(cfg)
    text = (experiments.result_to_csv(result) if args.format == "csv"
            else experiments.result_to_json(result))
    _emit(text, args.out if args.out is not None else cfg.output)


def cmd_run(args):
    from . import experiments

    _run_config(experiments.load_config(args.config), args)


def cmd_spectrum(args):
    from . import experiments, models, splitting

    if args.model == "xy":
        params = models.XYParams(length=args.L, j=args.J, alpha=args.alpha, h=args.h)
    else:
        params = models.RandomFieldParams(
            length=args.L, j=args.J, h_max=args.H,
            seed=args.seed or 0, realization=args.realization,
        )
    sol = experiments.solve_chain(params)
    index, _ = sol.state(args.state)
    coeffs = splitting.compute_gamma(
        sol.es.state(index), float(sol.es.values[index]),
        splitting.SplitOperatorSpec(), sol.partition, sol.es_a, sol.es_b,
    )
    spectrum = splitting.build_spectrum(coeffs, broaden=args.eta)
    if args.format == "json":
        _emit(splitting.spectrum_to_json(spectrum) + "\n", args.out)
    else:
        lines = ["omega,weight"]
        lines += [f"{f!r},{w!r}" for f, w in spectrum.peaks]
        _emit("\n".join(lines) + "\n", args.out)


def cmd_sweep_disorder(args):
    from . import experiments

    window = tuple(float(x) for x in args.window.split(","))
    cfg = experiments.ExperimentConfig(
        scenario="disorder_sweep",
        model_kind="random_field",
        j=args.J,
        sizes=tuple(int(x) for x in args.sizes.split(",")),
        disorder_grid=tuple(float(x) for x in args.h_values.split(",")),
        ensemble=experiments.EnsembleOptions(
            n_realizations=args.realizations,
            n_states_per_realization=args.states_per_realization,
            energy_window=window,
        ),
        seed=args.seed or 0,
        threads=args.threads or 1,
    )
    args.seed = None
    args.threads = None
    _run_config(cfg, args)


def cmd_rf_check(args):
    from . import experiments

    cfg = experiments.ExperimentConfig(
        scenario="rf_check",
        rf=experiments.RFCheckOptions(
            length=args.L, alpha=args.alpha, j=args.J, h=args.h, state=args.state,
            rabi=args.rabi, t_final=args.t_final, dt=args.dt,
            freq_step=args.freq_step,
        ),
        seed=args.seed or 0,
        threads=args.threads or 1,
    )
    args.seed = None
    args.threads = None
    _run_config(cfg, args)


COMMANDS = {
    "run": cmd_run,
    "spectrum": cmd_spectrum,
    "sweep-disorder": cmd_sweep_disorder,
    "rf-check": cmd_rf_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    import json

    from .errors import SplitSpecError

    try:
        COMMANDS[args.command](args)
    except (SplitSpecError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
