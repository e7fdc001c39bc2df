"""Command-line front end.

Commands: analyze | simulate | estimate | compensate | scenario.
Configuration comes from a flat key=value file plus flags, with precedence
flag > config file > default. Every command writes its result table (CSV by
default, JSON on request) plus a run manifest with content digests, so
byte-identical inputs reproduce byte-identical outputs.

Exit codes: 0 success, 2 usage error, 3 infeasible result, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile

from . import __version__
from .analytic import (
    FULL_PRECISION,
    LinkParameters,
    QuantizerSpec,
    Regime,
    ebn0_to_pu,
    estimation_variances,
    joint_compensation,
    pilot_compensation_estimation,
    pu_to_ebn0,
)
from .ber import ber_closed_form, ber_two_term
from .errors import INFEASIBLE, NumericFailure, is_feasible
from .quantizer import design_codebook
from .simulator import CsiMode, SimConfig, blocks_for_target, run_ber, run_estimation_error
from .solvers import PowerModel, max_users, min_antennas, power_optimal_resolution

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


class InfeasibleResult(Exception):
    pass


def _fmt(value) -> str:
    """Stable cell formatting: floats at 9 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return "%.9g" % value
    return str(value)


def _atomic_write_text(path: str, text: str) -> str:
    """Write via temp file + rename; returns the content's sha256 hex."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    data = text.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return hashlib.sha256(data).hexdigest()


def _write_rows(path: str, header, rows, fmt: str) -> str:
    if fmt == "json":
        payload = [dict(zip(header, (_fmt(c) for c in row))) for row in rows]
        return _atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c) for c in row) for row in rows)
    return _atomic_write_text(path, "\n".join(lines) + "\n")


def _load_config(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return out


def _parse_range(text: str, key: str):
    """Inclusive START:STOP:STEP grid."""
    try:
        start_s, stop_s, step_s = text.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError as exc:
        raise UsageError(f"{key} must look like START:STOP:STEP, got {text!r}") from exc
    if step <= 0:
        raise UsageError(f"{key} step must be positive, got {step}")
    values = []
    k = 0
    while True:
        v = start + k * step
        if v > stop + 1e-9:
            break
        values.append(v)
        k += 1
    if not values:
        raise UsageError(f"{key} range {text!r} is empty")
    return values


def _parse_bits_list(text: str):
    out = []
    for item in text.split(","):
        item = item.strip().lower()
        if not item:
            continue
        if item in ("full", "inf", "fp"):
            out.append(FULL_PRECISION)
        else:
            try:
                out.append(int(item))
            except ValueError as exc:
                raise UsageError(f"bad bits value {item!r}") from exc
    if not out:
        raise UsageError("bits list is empty")
    return out


class Resolver:
    """Key lookup with flag > config > default precedence; records what it
    resolved for the run manifest."""

    def __init__(self, flags: dict, config: dict):
        self._flags = {k: v for k, v in flags.items() if v is not None}
        self._config = config
        self.resolved = {}

    def get(self, key: str, default=None, cast=str, required: bool = False):
        if key in self._flags:
            raw = self._flags[key]
        elif key in self._config:
            raw = self._config[key]
        elif required:
            raise UsageError(f"missing required key {key!r} (flag or config file)")
        else:
            self.resolved[key] = default
            return default
        try:
            value = cast(raw) if isinstance(raw, str) else raw
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {key!r}: {raw!r}") from exc
        self.resolved[key] = value
        return value


def _manifest_path(out_dir: str, command: str) -> str:
    return os.path.join(out_dir, f"{command}_manifest.json")


def _write_manifest(out_dir, command, resolver, seed, outputs, extra=None):
    doc = {
        "command": command,
        "resolved_config": {k: _fmt(v) if v is not None else None for k, v in sorted(resolver.resolved.items())},
        "seed": seed,
        "tool_version": __version__,
        "outputs": [{"path": os.path.basename(p), "sha256": h} for p, h in outputs],
    }
    if extra:
        doc.update(extra)
    _atomic_write_text(
        _manifest_path(out_dir, command), json.dumps(doc, indent=2, sort_keys=True) + "\n"
    )


def _link_params(res: Resolver, tx_power: float, pilot_required: bool = True):
    pilot = res.get("pilot_len", cast=float, required=pilot_required)
    return LinkParameters(
        n_antennas=res.get("n_antennas", cast=int, required=True),
        n_users=res.get("n_users", cast=int, required=True),
        pilot_len=pilot,
        tx_power=tx_power,
        mod_order=res.get("mod_order", cast=int, required=True),
    )


def cmd_analyze(res: Resolver, out_dir: str, fmt: str):
    grid = _parse_range(res.get("ebn0", required=True), "ebn0")
    bits_list = _parse_bits_list(res.get("bits", default="1,2,3,4"))
    mod_order = res.get("mod_order", cast=int, required=True)
    full = QuantizerSpec.full_precision()

    def curve_rows(label, quant, regime):
        rows = []
        for e in grid:
            params = _link_params(res, tx_power=ebn0_to_pu(e, mod_order))
            closed, _ = ber_closed_form(params, quant, regime)
            two = ber_two_term(params, quant, regime)
            rows.append((label, e, closed, two))
        return rows

    rows = []
    rows += curve_rows("full_prec_perfect_csi", full, Regime.PERFECT_CSI_FULL_PREC)
    rows += curve_rows("full_prec_est_csi", full, Regime.IMPERFECT_CSI_FULL_PREC)
    for bits in bits_list:
        if bits == FULL_PRECISION:
            continue  # already covered by the reference curve
        rows += curve_rows(
            f"b{bits}_est_csi", QuantizerSpec.from_bits(bits), Regime.IMPERFECT_CSI_QUANTIZED
        )
    path = os.path.join(out_dir, "analyze.csv" if fmt == "csv" else "analyze.json")
    digest = _write_rows(path, ("curve", "ebn0_db", "ber_closed", "ber_two_term"), rows, fmt)
    return [(path, digest)], None


def cmd_simulate(res: Resolver, out_dir: str, fmt: str, seed: int, workers: int):
    grid = _parse_range(res.get("ebn0", required=True), "ebn0")
    bits_list = _parse_bits_list(res.get("bits", default="full"))
    if len(bits_list) != 1:
        raise UsageError("simulate runs one resolution per invocation; pass a single bits value")
    bits = bits_list[0]
    quant = (
        QuantizerSpec.full_precision()
        if bits == FULL_PRECISION
        else QuantizerSpec.from_bits(bits)
    )
    mod_order = res.get("mod_order", cast=int, required=True)
    spb = res.get("symbols_per_block", default=500, cast=int)
    csi = CsiMode(res.get("csi_mode", default="estimated"))
    n_blocks = res.get("n_blocks", cast=int)
    target = res.get("target_ber", cast=float)
    max_bits = res.get("max_bits", default=int(2e8), cast=lambda s: int(float(s)))

    probe = _link_params(res, tx_power=1.0, pilot_required=(csi is CsiMode.ESTIMATED))
    if n_blocks is None:
        if target is None:
            raise UsageError("simulate needs n_blocks or target_ber to size the run")
        n_blocks = blocks_for_target(probe, target, symbols_per_block=spb)
    bits_per_point = (
        n_blocks * spb * probe.n_users * 2 * int(math.log2(math.isqrt(mod_order)))
    )
    total_bits = bits_per_point * len(grid)
    if total_bits > max_bits:
        raise UsageError(
            f"simulation budget exceeded: needs {total_bits} bits "
            f"({bits_per_point} per point x {len(grid)} points) > max_bits={max_bits}"
        )

    rows = []
    for e in grid:
        params = _link_params(
            res, tx_power=ebn0_to_pu(e, mod_order), pilot_required=(csi is CsiMode.ESTIMATED)
        )
        cfg = SimConfig(
            params=params,
            quant=quant,
            n_blocks=n_blocks,
            symbols_per_block=spb,
            seed=seed,
            csi_mode=csi,
        )
        result = run_ber(cfg, n_workers=workers)
        rows.append(
            (e, result.ber, result.ci_low, result.ci_high, result.bits_simulated, seed)
        )
    path = os.path.join(out_dir, "simulate.csv" if fmt == "csv" else "simulate.json")
    digest = _write_rows(
        path, ("ebn0_db", "ber", "ci_low", "ci_high", "bits_simulated", "seed"), rows, fmt
    )
    codebook_hash = (
        None if quant.is_full_precision else design_codebook(quant.bits).content_hash()
    )
    extras = {
        "codebook_sha256": codebook_hash,
        # fresh pilots and a fresh estimate in every coherence block
        "csi_refresh": "per_block",
    }
    return [(path, digest)], extras


def cmd_estimate(res: Resolver, out_dir: str, fmt: str, seed: int, workers: int):
    axis = res.get("axis", default="power")
    if axis not in ("power", "pilot_len"):
        raise UsageError(f"axis must be 'power' or 'pilot_len', got {axis!r}")
    bits_list = _parse_bits_list(res.get("bits", default="3"))
    if len(bits_list) != 1:
        raise UsageError("estimate runs one resolution per invocation")
    bits = bits_list[0]
    quant = (
        QuantizerSpec.full_precision()
        if bits == FULL_PRECISION
        else QuantizerSpec.from_bits(bits)
    )
    mod_order = res.get("mod_order", cast=int, required=True)
    n_blocks = res.get("n_blocks", default=40, cast=int)

    def point(params):
        analytic_value = estimation_variances(params, quant).var_error
        cfg = SimConfig(
            params=params,
            quant=quant,
            n_blocks=n_blocks,
            symbols_per_block=1,
            seed=seed,
            csi_mode=CsiMode.ESTIMATED,
        )
        empirical = run_estimation_error(cfg, n_workers=workers).value
        return analytic_value, empirical

    rows = []
    if axis == "power":
        grid = _parse_range(res.get("ebn0", required=True), "ebn0")
        for e in grid:
            params = _link_params(res, tx_power=ebn0_to_pu(e, mod_order))
            rows.append((e,) + point(params))
        header = ("ebn0_db", "sigma2_eq_analytic", "sigma2_eq_empirical")
    else:
        taus = _parse_range(res.get("pilot_grid", required=True), "pilot_grid")
        e = res.get("ebn0_db", cast=float, required=True)
        for tau in taus:
            base = _link_params(res, tx_power=ebn0_to_pu(e, mod_order), pilot_required=False)
            params = LinkParameters(
                base.n_antennas, base.n_users, int(tau), base.tx_power, base.mod_order
            )
            rows.append((tau,) + point(params))
        header = ("pilot_len", "sigma2_eq_analytic", "sigma2_eq_empirical")
    path = os.path.join(out_dir, "estimate.csv" if fmt == "csv" else "estimate.json")
    digest = _write_rows(path, header, rows, fmt)
    return [(path, digest)], None


def cmd_compensate(res: Resolver, out_dir: str, fmt: str):
    mod_order = res.get("mod_order", cast=int, required=True)
    n_users = res.get("n_users", cast=int, required=True)
    tau_ref = res.get("ref_pilot_len", cast=float, required=True)
    ref_pu = res.get("ref_pu", cast=float)
    if ref_pu is None:
        ref_ebn0 = res.get("ref_ebn0", cast=float, required=True)
        ref_pu = ebn0_to_pu(ref_ebn0, mod_order)
    bits_list = _parse_bits_list(res.get("bits", default="3"))
    if len(bits_list) != 1 or bits_list[0] == FULL_PRECISION:
        raise UsageError("compensate needs a single finite bits value")
    alpha = QuantizerSpec.from_bits(bits_list[0]).alpha
    grid = _parse_range(res.get("ebn0", required=True), "ebn0")
    rows = []
    any_feasible = False
    for e in grid:
        pu_q = ebn0_to_pu(e, mod_order)
        tau_est = pilot_compensation_estimation(tau_ref, ref_pu, pu_q, alpha, n_users)
        tau_sinr = joint_compensation(tau_ref, ref_pu, pu_q, alpha, n_users)
        feasible = is_feasible(tau_sinr)
        any_feasible = any_feasible or feasible
        rows.append((e, tau_est, tau_sinr, feasible))
    path = os.path.join(out_dir, "compensate.csv" if fmt == "csv" else "compensate.json")
    digest = _write_rows(
        path, ("ebn0_db", "tau_q_estimation", "tau_q_sinr", "sinr_feasible"), rows, fmt
    )
    if not any_feasible:
        return [(path, digest)], "infeasible"
    return [(path, digest)], None


def cmd_scenario(name: str, res: Resolver, out_dir: str, fmt: str):
    mod_order = res.get("mod_order", cast=int, required=True)
    target = res.get("target_ber", cast=float, required=True)
    pilot_len = res.get("pilot_len", cast=float, required=True)
    outputs = []
    summary = {"scenario": name}
    status = None

    if name == "nmin":
        bits_list = _parse_bits_list(res.get("bits", default="2,3,4"))
        n_users = res.get("n_users", cast=int, required=True)
        e = res.get("ebn0_db", cast=float, required=True)
        n_cap = res.get("n_cap", default=4096, cast=int)
        rows = []
        results = {}
        for bits in bits_list:
            quant = (
                QuantizerSpec.full_precision()
                if bits == FULL_PRECISION
                else QuantizerSpec.from_bits(bits)
            )
            n_min = min_antennas(n_users, quant, pilot_len, mod_order, target, e, n_cap=n_cap)
            rows.append((bits, n_min, is_feasible(n_min)))
            results[str(bits)] = n_min if is_feasible(n_min) else "infeasible"
        if not any(r[2] for r in rows):
            status = "infeasible"
        summary["min_antennas"] = results
        header = ("bits", "n_min", "feasible")
    elif name == "kmax":
        bits_list = _parse_bits_list(res.get("bits", default="2,3,4"))
        n_antennas = res.get("n_antennas", cast=int, required=True)
        grid = _parse_range(res.get("ebn0", required=True), "ebn0")
        rows = []
        results = {}
        for bits in bits_list:
            quant = (
                QuantizerSpec.full_precision()
                if bits == FULL_PRECISION
                else QuantizerSpec.from_bits(bits)
            )
            best = (0, None)
            for e in grid:
                k = max_users(n_antennas, quant, pilot_len, mod_order, target, e)
                rows.append((bits, e, k))
                if k > best[0]:
                    best = (k, e)
            results[str(bits)] = {"max_users": best[0], "at_ebn0_db": best[1]}
        summary["max_users"] = results
        header = ("bits", "ebn0_db", "k_max")
    elif name == "power":
        bits_list = [b for b in _parse_bits_list(res.get("bits", default="1,2,3,4"))]
        if any(b == FULL_PRECISION for b in bits_list):
            raise UsageError("power scenario needs finite ADC resolutions")
        n_users = res.get("n_users", cast=int, required=True)
        model = PowerModel(
            fom_fj=res.get("fom", default=1432.1, cast=float),
            sample_rate_hz=res.get("sample_rate", default=100e6, cast=float),
            rf_per_antenna_w=res.get("rf_per_antenna", default=0.0, cast=float),
            static_w=res.get("static", default=0.0, cast=float),
            noise_ref_w=res.get("noise_ref", default=1e-3, cast=float),
        )
        n_values = [int(v) for v in _parse_range(res.get("n_range", required=True), "n_range")]
        search = power_optimal_resolution(
            model, n_users, pilot_len, mod_order, target, bits_list, n_values
        )
        rows = []
        for bits in sorted(search.curves):
            for pt in search.curves[bits]:
                rows.append(
                    (bits, pt.n_antennas, pt.ebn0_db, pt.pu, pt.p_total_w, pt.feasible)
                )
        summary["optimum"] = {
            "bits": search.best_bits,
            "n_antennas": search.best_n,
            "p_total_w": search.best_p_total_w if is_feasible(search.best_p_total_w) else "infeasible",
        }
        summary["crossings"] = [
            {"bits_low": c.bits_low, "bits_high": c.bits_high, "n_antennas": c.n_antennas}
            for c in search.crossings
        ]
        if search.best_bits is None:
            status = "infeasible"
        header = ("bits", "n_antennas", "ebn0_db", "pu", "p_total_w", "feasible")
    else:
        raise UsageError(f"unknown scenario {name!r}; choose nmin, kmax or power")

    base = f"scenario_{name}"
    path = os.path.join(out_dir, f"{base}.csv" if fmt == "csv" else f"{base}.json")
    outputs.append((path, _write_rows(path, header, rows, fmt)))
    spath = os.path.join(out_dir, f"{base}_summary.json")
    outputs.append(
        (spath, _atomic_write_text(spath, json.dumps(summary, indent=2, sort_keys=True, default=_fmt) + "\n"))
    )
    return outputs, status


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmimo",
        description="Analysis, simulation and design solvers for coarsely "
        "quantized massive-MIMO uplinks",
    )
    parser.add_argument("command", choices=["analyze", "simulate", "estimate", "compensate", "scenario"])
    parser.add_argument("scenario_name", nargs="?", help="nmin | kmax | power (scenario command)")
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, help="64-bit master seed")
    parser.add_argument("--format", choices=["csv", "json"], help="row output format")
    parser.add_argument("--bits", help="comma list of ADC resolutions, e.g. 1,2,3,full")
    parser.add_argument("--ebn0", help="Eb/N0 grid as START:STOP:STEP in dB")
    parser.add_argument("--workers", type=int, help="parallel workers for simulation")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        config = _load_config(args.config) if args.config else {}
        flags = {
            "seed": args.seed,
            "format": args.format,
            "bits": args.bits,
            "ebn0": args.ebn0,
            "workers": args.workers,
        }
        res = Resolver(flags, config)
        fmt = res.get("format", default="csv")
        if fmt not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {fmt!r}")
        seed = res.get("seed", default=0, cast=int)
        workers = res.get("workers", default=1, cast=int)
        out_dir = args.out
        os.makedirs(out_dir, exist_ok=True)

        status = None
        if args.command == "analyze":
            outputs, extra = cmd_analyze(res, out_dir, fmt)
        elif args.command == "simulate":
            outputs, extra = cmd_simulate(res, out_dir, fmt, seed, workers)
        elif args.command == "estimate":
            outputs, extra = cmd_estimate(res, out_dir, fmt, seed, workers)
        elif args.command == "compensate":
            outputs, extra = cmd_compensate(res, out_dir, fmt)
            status = extra if extra == "infeasible" else None
            extra = None
        else:
            if not args.scenario_name:
                raise UsageError("scenario command needs a name: nmin, kmax or power")
            outputs, status = cmd_scenario(args.scenario_name, res, out_dir, fmt)
            extra = None
        manifest_name = (
            args.command if args.command != "scenario" else f"scenario_{args.scenario_name}"
        )
        _write_manifest(out_dir, manifest_name, res, seed, outputs, extra if isinstance(extra, dict) else None)
        if status == "infeasible":
            print("result: infeasible", file=sys.stderr)
            return EXIT_INFEASIBLE
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
