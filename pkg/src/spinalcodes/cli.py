"""Command-line front end: bound | floor | threshold | sweep | roundtrip.

Configuration comes from an optional JSON file (--config) overridden by
flags; every run echoes the full resolved configuration, the master seed,
and the hash id into the output so results are reproducible from the
artifact alone.  CSV uses '.' decimals, LF line endings, and repr-exact
floats; rerunning a command with the same configuration produces
byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 budget/runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, analysis, montecarlo
from .channel import ChannelModel, sigma_from_snr, transmit
from .codec import (
    BudgetExceededError, CodeParams, Message, encode, ml_decode,
    registered_hashes, segment_costs, spine_chain,
)

SWEEP_CSV_HEADER = "gamma_db,sigma2,trials,errors,bler,ci_low,ci_high,bound,floor,threshold_db"

_CONFIG_KEYS = (
    "n", "k", "v", "c", "L", "dmin", "channel", "m", "snr_grid", "trials",
    "target_errors", "seed", "quadrature_n", "x", "out", "format", "hash_id",
)


@dataclass
class RunConfig:
    """Resolved configuration for one CLI invocation."""

    n: int = 8
    k: int = 4
    v: int = 32
    c: int = 4
    L: int = 4
    dmin: float = 2.0
    channel: tuple[str, ...] = ("awgn",)
    m: float = 1.0
    snr_grid: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 10**6
    target_errors: int = 200
    seed: int = 0
    quadrature_n: tuple[int, ...] = (64,)
    x: float = 0.01
    out: str | None = None
    format: str = "csv"
    hash_id: str = "splitmix64"

    def validate(self) -> None:
        self.code_params()  # names the offending CodeParams field itself
        if not self.snr_grid:
            raise ValueError("gamma_grid (--snr-grid) must be non-empty")
        if any(b <= a for a, b in zip(self.snr_grid, self.snr_grid[1:])):
            raise ValueError("gamma_grid (--snr-grid) must be strictly ascending")
        for kind in self.channel:
            self.model(kind)
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.target_errors < 0:
            raise ValueError(
                f"target_errors must be >= 0 (0 disables early stop), "
                f"got {self.target_errors}"
            )
        if not self.quadrature_n or any(nq < 1 for nq in self.quadrature_n):
            raise ValueError(f"quadrature_n must be >= 1, got {self.quadrature_n}")
        if not 0.0 < self.x < 4.0:
            raise ValueError(f"x must be in (0, 4), got {self.x}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")

    def code_params(self) -> CodeParams:
        return CodeParams(n=self.n, k=self.k, c=self.c, L=self.L, v=self.v,
                          d_min=self.dmin, hash_id=self.hash_id)

    def model(self, kind: str | None = None) -> ChannelModel:
        kind = kind if kind is not None else self.channel[0]
        if kind == "nakagami":
            return ChannelModel.nakagami(self.m)
        return ChannelModel(kind)

    def stop_rule(self) -> montecarlo.StopRule:
        target = self.target_errors if self.target_errors > 0 else None
        return montecarlo.StopRule(max_trials=self.trials, target_errors=target)

    def echo(self) -> dict:
        """Experiment configuration (emission destination excluded)."""
        d = asdict(self)
        d.pop("out")
        d.pop("format")
        d["channel"] = list(self.channel)
        d["snr_grid"] = list(self.snr_grid)
        d["quadrature_n"] = list(self.quadrature_n)
        return d


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------

def _parse_grid(text: str) -> tuple[float, ...]:
    """Accept '0,5,10' or 'start:stop:step' (inclusive endpoints)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"gamma_grid range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"gamma_grid step must be > 0, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(count))
    return tuple(float(p) for p in text.split(","))


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


def _parse_channels(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(","))


def load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must contain a JSON object")
    for key in data:
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    overrides: dict = {}
    if getattr(args, "config", None):
        overrides.update(load_config_file(args.config))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    for key, value in overrides.items():
        if key == "snr_grid" and isinstance(value, str):
            value = _parse_grid(value)
        elif key == "snr_grid":
            value = tuple(float(g) for g in value)
        elif key == "quadrature_n":
            value = _parse_int_list(value) if isinstance(value, str) else tuple(value)
        elif key == "channel":
            value = _parse_channels(value) if isinstance(value, str) else tuple(value)
        setattr(cfg, key, value)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    """Shortest round-trip decimal form; locale-free."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _provenance(cfg: RunConfig) -> dict:
    return {
        "tool": f"spinal-codes {__version__}",
        "hash_id": cfg.hash_id,
        "master_seed": cfg.seed,
        "config": cfg.echo(),
    }


def _comment_block(cfg: RunConfig) -> str:
    prov = _provenance(cfg)
    return (
        f"# tool: {prov['tool']}\n"
        f"# hash_id: {prov['hash_id']}\n"
        f"# master_seed: {prov['master_seed']}\n"
        f"# config: {json.dumps(prov['config'], sort_keys=True)}\n"
    )


def _table_csv(cfg: RunConfig, header: list[str], rows: list[list]) -> str:
    lines = [_comment_block(cfg) + ",".join(header)]
    lines.extend(",".join(_fmt(v) if not isinstance(v, str) else v for v in row)
                 for row in rows)
    return "\n".join(lines) + "\n"


def _table_json(cfg: RunConfig, header: list[str], rows: list[list]) -> str:
    records = [dict(zip(header, row)) for row in rows]
    doc = {"provenance": _provenance(cfg), "records": records}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(cfg: RunConfig, header: list[str], rows: list[list]) -> None:
    text = (_table_csv if cfg.format == "csv" else _table_json)(cfg, header, rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_bound(cfg: RunConfig) -> int:
    params = cfg.code_params()
    model = cfg.model()
    floor = analysis.error_floor(params).p_ef
    schemes = [(nq, analysis.quadrature_uniform(nq)) for nq in cfg.quadrature_n]
    header = ["gamma_db", "sigma2", "floor"] + [f"bound_N{nq}" for nq, _ in schemes]
    rows = []
    for gamma_db in cfg.snr_grid:
        sigma2 = sigma_from_snr(gamma_db, params.c, params.d_min).sigma2
        row = [gamma_db, sigma2, floor]
        row.extend(
            analysis.bler_upper_bound(params, sigma2, model, scheme).p_e_upper
            for _, scheme in schemes
        )
        rows.append(row)
    _emit(cfg, header, rows)
    return 0


def cmd_floor(cfg: RunConfig) -> int:
    params = cfg.code_params()
    result = analysis.error_floor(params)
    header = ["n", "k", "v", "c", "L", "d_min", "hash_id", "p_ef"]
    row = [params.n, params.k, params.v, params.c, params.L, params.d_min,
           params.hash_id, result.p_ef]
    _emit(cfg, header, [row])
    if cfg.out:
        sys.stdout.write(f"P_EF = {result.p_ef:.6g}\n")
    return 0


def cmd_threshold(cfg: RunConfig) -> int:
    header = ["channel", "m", "c", "x", "gamma_th_linear", "gamma_th_db"]
    rows = []
    for kind in cfg.channel:
        model = cfg.model(kind)
        res = analysis.snr_threshold(model, cfg.c, cfg.x)
        m_field = model.m if kind == "nakagami" else ""
        rows.append([kind, m_field, cfg.c, cfg.x,
                     res.gamma_th_linear, res.gamma_th_db])
    _emit(cfg, header, rows)
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    if len(cfg.channel) != 1:
        raise ValueError("sweep takes exactly one channel")
    params = cfg.code_params()
    records = montecarlo.sweep(
        params,
        cfg.model(),
        cfg.snr_grid,
        stop=cfg.stop_rule(),
        master_seed=cfg.seed,
        scheme=analysis.quadrature_uniform(cfg.quadrature_n[0]),
        x=cfg.x,
    )
    header = SWEEP_CSV_HEADER.split(",")
    rows = []
    for r in records:
        e = r.estimate
        rows.append([r.gamma_db, r.sigma2, e.trials, e.errors, e.p_hat,
                     e.ci_low, e.ci_high, r.bound, r.floor, r.threshold_db])
    _emit(cfg, header, rows)
    return 0


def cmd_roundtrip(cfg: RunConfig) -> int:
    if len(cfg.channel) != 1:
        raise ValueError("roundtrip takes exactly one channel")
    params = cfg.code_params()
    model = cfg.model()
    gamma_db = cfg.snr_grid[0]
    noise = sigma_from_snr(gamma_db, params.c, params.d_min)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    message = Message.random(params.n, rng)
    obs = transmit(encode(message, params), model, noise, rng)
    decoded = ml_decode(obs, params)
    hexw = (params.v + 3) // 4
    out = sys.stdout
    out.write(f"spinal roundtrip: n={params.n} k={params.k} v={params.v} "
              f"c={params.c} L={params.L} hash={params.hash_id} "
              f"channel={model.label()} gamma_db={_fmt(gamma_db)} "
              f"sigma2={_fmt(noise.sigma2)} seed={cfg.seed}\n")
    out.write(f"message: {''.join(map(str, message.bits))}\n")
    for i, s in enumerate(spine_chain(message, params), start=1):
        out.write(f"spine[{i}]: {s:0{hexw}x}\n")
    for i, cost in enumerate(segment_costs(decoded, obs, params), start=1):
        out.write(f"segment[{i}] cost: {_fmt(cost)}\n")
    out.write(f"decoded: {''.join(map(str, decoded.bits))}\n")
    out.write(f"decoded == sent: {'true' if decoded == message else 'false'}\n")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "bound": cmd_bound,
    "floor": cmd_floor,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
    "roundtrip": cmd_roundtrip,
}


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--n", type=int, help="message length in bits")
    p.add_argument("--k", type=int, help="segment length in bits")
    p.add_argument("--v", type=int, help="spine width in bits")
    p.add_argument("--c", type=int, help="modulation order (even)")
    p.add_argument("--L", type=int, help="transmitted passes")
    p.add_argument("--dmin", type=float, help="minimum constellation distance")
    p.add_argument("--channel", help="awgn|rayleigh|nakagami (comma list for threshold)")
    p.add_argument("--m", type=float, help="nakagami shape parameter")
    p.add_argument("--snr-grid", dest="snr_grid",
                   help="SNR grid in dB: '0,5,10' or 'start:stop:step'")
    p.add_argument("--trials", type=int, help="trial cap per grid point")
    p.add_argument("--target-errors", dest="target_errors", type=int,
                   help="stop a point early at this many errors (0 disables)")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--quadrature-N", dest="quadrature_n",
                   help="quadrature points N (comma list allowed for bound)")
    p.add_argument("--x", type=float, help="threshold precision constant in (0, 4)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--hash-id", dest="hash_id",
                   help=f"hash function: {', '.join(registered_hashes())}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinal",
        description="Spinal code analysis and simulation toolbox",
    )
    parser.add_argument("--version", action="version",
                        version=f"spinal-codes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("bound", "evaluate the BLER upper bound over an SNR grid"),
        ("floor", "evaluate the error floor"),
        ("threshold", "evaluate SNR thresholds per channel"),
        ("sweep", "Monte Carlo BLER sweep joined with analysis columns"),
        ("roundtrip", "encode/transmit/decode demo with cost trace"),
    ):
        _add_common_flags(sub.add_parser(name, help=help_text))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return _COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceededError, ArithmeticError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
