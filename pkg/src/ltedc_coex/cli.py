"""``ltedc-coex``: sweeps, simulations, fairness solves and model/simulation comparison.

Exit status: 0 success, 1 usage or configuration error, 2 comparison outside
tolerance, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from . import __version__
from .config import ConfigError
from .sweep import (
    ANALYZE_COLUMNS,
    FAIRNESS_COLUMNS,
    KEY_COLUMNS,
    SIMULATE_COLUMNS,
    SweepSpec,
    analyze_point,
    fairness_point,
    load_sweep,
    simulate_point,
)

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE, EXIT_INTERNAL = 0, 1, 2, 3

# analytical column -> simulated column
COMPARED = (
    ("p_cwl", "p_coll_lte"),
    ("p_c_total", "p_coll_total"),
    ("tput_wifi_mbps", "tput_wifi_mbps"),
)
JOIN_KEYS = [c for c in KEY_COLUMNS if c != "sweep_value"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with 2, which means "tolerance" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, columns: list[str], rows: list[dict], digest: str) -> None:
    buf = io.StringIO()
    buf.write(f"# ltedc-coex {__version__} config_sha256={digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def read_csv(path) -> list[dict]:
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return list(csv.DictReader(lines))


def _map(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map keeps input order whatever the completion order
        return list(pool.map(_star, [fn] * len(items), items))


def _star(fn, args):
    return fn(*args)


def _require_mode(spec: SweepSpec, mode: str) -> None:
    if mode not in spec.modes:
        raise ConfigError(f"sweep spec does not list mode {mode!r} (modes: {list(spec.modes)})")


def _plot_path(arg: str | None, out: Path) -> Path | None:
    if arg is None:
        return None
    return Path(arg) if arg else out.with_suffix(".png")


def cmd_analyze(config_path, out_path, plot=None, jobs: int = 1) -> list[dict]:
    spec = load_sweep(config_path)
    _require_mode(spec, "analytical")
    rows = _map(analyze_point, spec.points(), jobs)
    write_csv(out_path, ANALYZE_COLUMNS, rows, spec.digest())
    if plot is not None:
        from .plotting import plot_sweep

        plot_sweep(rows, spec.sweep_var, plot)
    return rows


def cmd_simulate(
    config_path,
    out_path,
    runs: int = 5,
    sim_time: float = 200.0,
    seed: int = 1,
    trace: bool = False,
    plot=None,
    jobs: int = 1,
) -> list[dict]:
    if runs < 1:
        raise UsageError("--runs must be >= 1")
    spec = load_sweep(config_path)
    _require_mode(spec, "simulate")
    points = spec.points()
    fn = partial(simulate_point, runs=runs, sim_time=sim_time, seed=seed)
    rows = _map(fn, points, jobs)
    digest = hashlib.sha256(f"{spec.digest()}:{runs}:{sim_time!r}:{seed}".encode()).hexdigest()[:16]
    write_csv(out_path, SIMULATE_COLUMNS, rows, digest)
    if trace:
        _write_trace(points, Path(out_path).with_suffix(".trace"), runs, sim_time, seed)
    if plot is not None:
        from .plotting import plot_sweep

        plot_sweep([], spec.sweep_var, plot, sim_rows=rows)
    return rows


def _write_trace(points, path: Path, runs: int, sim_time: float, seed: int) -> None:
    from .des import SimConfig, run

    with path.open("w") as fh:
        for value, cfg in points:
            for i in range(runs):
                fh.write(f"# point={value} alpha={cfg.lte.alpha} n_w={cfg.n_w} seed={seed + i}\n")
                run(SimConfig(cfg, sim_time=sim_time, seed=seed + i), trace=fh)


def cmd_fairness(config_path, mode: str, out_path, plot=None, jobs: int = 1) -> list[dict]:
    if mode not in ("access", "throughput"):
        raise UsageError(f"--mode must be 'access' or 'throughput', got {mode!r}")
    spec = load_sweep(config_path)
    if spec.sweep_var == "alpha":
        raise ConfigError("fairness solves for the duty cycle; sweep over n_w or packet_bytes")
    _require_mode(spec, f"fairness_{mode}")
    rows = _map(partial(fairness_point, mode=mode), spec.points(), jobs)
    write_csv(out_path, FAIRNESS_COLUMNS, rows, hashlib.sha256(f"{spec.digest()}:{mode}".encode()).hexdigest()[:16])
    if plot is not None:
        from .plotting import plot_fairness

        plot_fairness(rows, plot)
    return rows


def _key(row: dict) -> tuple:
    return tuple(float(row[k]) for k in JOIN_KEYS)


def cmd_compare(
    analytical_csv,
    sim_csv,
    out_path,
    tolerance: float = 0.03,
    tput_tolerance: float = 0.07,
    plot=None,
) -> tuple[list[dict], dict, list[dict]]:
    """Join model and simulation rows; probabilities are checked in absolute
    terms against ``tolerance``, throughput relative to the simulated value
    against ``tput_tolerance``."""
    model = read_csv(analytical_csv)
    sim = {_key(r): r for r in read_csv(sim_csv)}
    for name, rows, col in (("analytical", model, "p_cwl"), ("simulated", list(sim.values()), "p_coll_lte")):
        if rows and col not in rows[0]:
            raise UsageError(f"{name} CSV lacks column {col!r}")
    joined, bad = [], []
    for r in model:
        s = sim.get(_key(r))
        if s is None:
            continue
        row = {c: r[c] for c in KEY_COLUMNS}
        for a_col, s_col in COMPARED:
            a, b = float(r[a_col]), float(s[s_col])
            row[a_col] = a
            row[f"sim_{s_col}"] = b
            row[f"dev_{a_col}"] = a - b
        sim_t = row["sim_tput_wifi_mbps"]
        if sim_t:
            row["rel_dev_tput"] = (row["tput_wifi_mbps"] - sim_t) / sim_t
        else:
            row["rel_dev_tput"] = 0.0 if row["tput_wifi_mbps"] == 0 else float("inf")
        # with several stations the model's edge term is a single-station
        # quantity, so only the total collision probability is gated there
        lte_ok = abs(row["dev_p_cwl"]) <= tolerance or int(float(r["n_w"])) > 1
        ok = (
            lte_ok
            and abs(row["dev_p_c_total"]) <= tolerance
            and abs(row["rel_dev_tput"]) <= tput_tolerance
        )
        row["within_tolerance"] = ok
        joined.append(row)
        if not ok:
            bad.append(row)
    if not joined:
        raise UsageError("no rows in common between the two CSVs")
    summary = {
        "max_abs_dev_p_cwl": max(abs(r["dev_p_cwl"]) for r in joined),
        "max_abs_dev_p_c_total": max(abs(r["dev_p_c_total"]) for r in joined),
        "max_abs_dev_tput_wifi_mbps": max(abs(r["dev_tput_wifi_mbps"]) for r in joined),
        "max_abs_rel_dev_tput": max(abs(r["rel_dev_tput"]) for r in joined),
    }
    columns = list(joined[0])
    digest = hashlib.sha256(
        Path(analytical_csv).read_bytes() + Path(sim_csv).read_bytes() + f"{tolerance!r}:{tput_tolerance!r}".encode()
    ).hexdigest()[:16]
    write_csv(out_path, columns, joined, digest)
    if plot is not None:
        from .plotting import plot_comparison

        plot_comparison(joined, plot)
    return joined, summary, bad


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ltedc-coex", description="Wi-Fi / duty-cycled LTE coexistence model and simulator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="JSON sweep spec")
        sp.add_argument("--out", required=True, help="output CSV path")
        sp.add_argument(
            "--plot",
            nargs="?",
            const="",
            default=None,
            metavar="PNG",
            help="also render a figure (default: the CSV path with .png)",
        )

    a = sub.add_parser("analyze", help="analytical model over a sweep")
    common(a)
    a.add_argument("--jobs", type=int, default=1, help="worker processes")

    s = sub.add_parser("simulate", help="discrete-event simulation over a sweep")
    common(s)
    s.add_argument("--runs", type=int, default=5)
    s.add_argument("--sim-time-s", type=float, default=200.0)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--trace", action="store_true", help="write an event trace next to the CSV")
    s.add_argument("--jobs", type=int, default=1)

    f = sub.add_parser("fairness", help="fair duty cycle per grid point")
    common(f)
    f.add_argument("--mode", required=True, choices=["access", "throughput"])
    f.add_argument("--jobs", type=int, default=1)

    c = sub.add_parser("compare", help="join analytical and simulated CSVs and check tolerances")
    c.add_argument("analytical_csv")
    c.add_argument("sim_csv")
    common(c, config=False)
    c.add_argument("--tolerance", type=float, default=0.03, help="absolute, collision probabilities")
    c.add_argument("--tput-tolerance", type=float, default=0.07, help="relative, throughput")
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    out = Path(args.out)
    plot = _plot_path(args.plot, out)
    try:
        if args.command == "analyze":
            rows = cmd_analyze(args.config, out, plot, args.jobs)
            print(f"wrote {len(rows)} rows to {out}")
        elif args.command == "simulate":
            rows = cmd_simulate(args.config, out, args.runs, args.sim_time_s, args.seed, args.trace, plot, args.jobs)
            print(f"wrote {len(rows)} rows to {out}")
        elif args.command == "fairness":
            rows = cmd_fairness(args.config, args.mode, out, plot, args.jobs)
            print(f"wrote {len(rows)} rows to {out}")
        else:
            joined, summary, bad = cmd_compare(
                args.analytical_csv, args.sim_csv, out, args.tolerance, args.tput_tolerance, plot
            )
            for k, v in summary.items():
                print(f"{k} {v:.6g}")
            if bad:
                print(f"{len(bad)} of {len(joined)} rows outside tolerance:", file=sys.stderr)
                for r in bad:
                    print(
                        "  " + " ".join(f"{k}={r[k]}" for k in KEY_COLUMNS)
                        + f" dev_p_cwl={r['dev_p_cwl']:.4f} dev_p_c_total={r['dev_p_c_total']:.4f}"
                        + f" rel_dev_tput={r['rel_dev_tput']:.4f}",
                        file=sys.stderr,
                    )
                return EXIT_TOLERANCE
        if plot is not None:
            print(f"figure {plot}")
        return EXIT_OK
    except (ConfigError, UsageError, OSError) as exc:
        print(f"ltedc-coex: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
