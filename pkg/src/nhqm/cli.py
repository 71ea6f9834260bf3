"""Command line interface reproducing the desk-scale reference results.

Usage::

    nhqm <command> --config <path> [--out <path>] [--threads N]
         [--override key=value ...] [--no-figure]

Commands: ``two-level``, ``ancilla-verify``, ``rlm-occupancy``,
``critical-scan``.  Every command reads a key = value config file,
writes a deterministic CSV (plus a JSON report for ancilla-verify) and
renders a PNG figure next to the delimited output unless figures are
disabled.  Exit codes: 0 success, 1 config error, 2 domain
precondition violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import figures
from .ancilla import build_embedding, embed_state, verify_equivalence
from .biortho import biortho_decompose
from .dynamics import Propagator, PureState, evolve_state
from .errors import ConfigError, NumericalError, PreconditionError
from .io import apply_overrides, parse_config, require_keys, write_csv
from .manybody import (
    ComplexPair,
    OccupationPolicy,
    ZeroMode,
    critical_green_scan,
    dot_occupancy_point,
    double_log_derivative,
    pt_convergence_scan,
)
from .models import (
    ChainParams,
    TwoLevelParams,
    two_level_hamiltonian,
    two_level_norm_closed,
    two_level_occupancy_closed,
)

__all__ = ["main", "run"]


def _pool_map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- two-level ----------------------------------------------------------------

TWO_LEVEL_SCHEMA = {
    "r": (0.6, float),
    "s": (1.0, float),
    "theta": (np.pi / 2, float),
    "phi": (0.0, float),
    "t_max": (10.0, float),
    "n_t": (200, int),
}


def cmd_two_level(config, out, threads):
    cfg = require_keys(config, TWO_LEVEL_SCHEMA, "two-level")
    p = TwoLevelParams(r=cfg["r"], s=cfg["s"], theta=cfg["theta"], phi=cfg["phi"])
    H = two_level_hamiltonian(p)
    es = biortho_decompose(H)
    prop = Propagator(es)
    up = PureState(np.array([1.0, 0.0], dtype=complex))
    rows = []
    for t in np.linspace(0.0, cfg["t_max"], cfg["n_t"]):
        psi = evolve_state(prop, up, float(t))
        v = psi.amplitudes
        norm2 = float(np.vdot(v, v).real)
        occ_num = float((abs(v[0]) ** 2) / norm2)
        rows.append({
            "z": p.z,
            "t": float(t),
            "norm": norm2,
            "occupancy_closed": two_level_occupancy_closed(p, float(t)),
            "occupancy_numeric": occ_num,
        })
    mismatch = max(abs(r["occupancy_closed"] - r["occupancy_numeric"])
                   for r in rows)
    if mismatch > 1e-10:
        raise NumericalError(
            f"closed-form/numeric occupancy mismatch {mismatch:.3e}")
    meta = {"command": "two-level", "r": p.r, "s": p.s, "theta": p.theta,
            "phi": p.phi, "z": p.z}
    write_csv(out, ["z", "t", "norm", "occupancy_closed", "occupancy_numeric"],
              rows, meta)
    return rows, {"z": p.z}


# -- ancilla-verify -------------------------------------------------------------

ANCILLA_SCHEMA = {
    "model": ("two-level", str),
    "r": (0.6, float),
    "s": (1.0, float),
    "theta": (np.pi / 2, float),
    "phi": (0.0, float),
    "dim": (6, int),
    "seed": (1234, int),
    "anti_scale": (0.05, float),
    "matrix_path": (None, str),
    "t_max": (10.0, float),
    "n_t": (50, int),
}


def random_unbroken_hamiltonian(dim: int, seed: int, anti_scale: float,
                                max_tries: int = 64) -> np.ndarray:
    """Random Hermitian plus small anti-Hermitian part, verified real-spectrum.

    The anti-Hermitian admixture is halved until all eigenvalues are
    real, so every seed yields a genuinely non-Hermitian sample in the
    unbroken phase.
    """
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    herm = (A + A.conj().T) / 2
    B = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    anti = (B - B.conj().T) / 2
    scale = anti_scale
    for _ in range(max_tries):
        H = herm + scale * anti
        if np.max(np.abs(np.linalg.eigvals(H).imag)) < 1e-10:
            return H
        scale /= 2.0
    raise PreconditionError(
        "could not reach a real-spectrum sample; lower anti_scale")


def cmd_ancilla_verify(config, out, threads):
    cfg = require_keys(config, ANCILLA_SCHEMA, "ancilla-verify")
    if cfg["model"] == "two-level":
        p = TwoLevelParams(r=cfg["r"], s=cfg["s"], theta=cfg["theta"],
                           phi=cfg["phi"])
        H = two_level_hamiltonian(p)
        rng = np.random.default_rng(cfg["seed"])
        psi0 = PureState(np.array([1.0, 0.0], dtype=complex))
    elif cfg["model"] == "random":
        H = random_unbroken_hamiltonian(cfg["dim"], cfg["seed"],
                                        cfg["anti_scale"])
        rng = np.random.default_rng(cfg["seed"] + 1)
        v = rng.normal(size=H.shape[0]) + 1j * rng.normal(size=H.shape[0])
        psi0 = PureState(v / np.linalg.norm(v))
    elif cfg["model"] == "matrix":
        if not cfg["matrix_path"]:
            raise ConfigError("model=matrix requires matrix_path")
        from .io import matrix_from_json
        H = matrix_from_json(Path(cfg["matrix_path"]).read_text(encoding="utf-8"))
        rng = np.random.default_rng(cfg["seed"])
        v = rng.normal(size=H.shape[0]) + 1j * rng.normal(size=H.shape[0])
        psi0 = PureState(v / np.linalg.norm(v))
    else:
        raise ConfigError("model must be 'two-level', 'random', or 'matrix'")

    emb = build_embedding(H)  # raises SpectrumNotReal for broken inputs
    t_grid = np.linspace(0.0, cfg["t_max"], cfg["n_t"])
    equiv = verify_equivalence(emb, psi0, t_grid)

    spec_s = np.sort(emb.eigensystem.eigenvalues.real)
    spec_sa = np.sort(np.linalg.eigvalsh(emb.h_sa))
    doubling = float(np.max(np.abs(spec_sa - np.sort(np.concatenate(
        [spec_s, spec_s])))))

    es_sa = biortho_decompose(emb.h_sa)
    prop_sa = Propagator(es_sa)
    emb_state = embed_state(emb, psi0)
    sub_res = 0.0
    for t in t_grid:
        big = evolve_state(prop_sa, emb_state, float(t)).amplitudes
        n = emb.dim
        sub_res = max(sub_res, float(np.linalg.norm(big[n:] - emb.g @ big[:n])))

    report = {
        "command": "ancilla-verify",
        "model": cfg["model"],
        "dim": int(emb.dim),
        "c": emb.c,
        "max_equivalence_residual": equiv,
        "spectrum_doubling_residual": doubling,
        "subspace_invariance_residual": sub_res,
        "h_sa_hermiticity": float(np.linalg.norm(emb.h_sa - emb.h_sa.conj().T)),
    }
    Path(out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    return report


# -- rlm-occupancy ---------------------------------------------------------------

RLM_SCHEMA = {
    "N": (2018, int),
    "J": (1.0, float),
    "gamma_abs": (0.2, float),
    "phi_min": (0.02, float),
    "phi_max": (1.55, float),
    "n_phi": (13, int),
    "policies": (["both", "none"], None),
    "filling_num": (1, int),
    "filling_den": (2, int),
}

_POLICY_MAP = {
    "both": ComplexPair.BOTH,
    "none": ComplexPair.NONE,
    "upper_only": ComplexPair.UPPER_ONLY,
    "lower_only": ComplexPair.LOWER_ONLY,
}


def _rlm_worker(args):
    N, J, gamma_abs, phi, policy_name, filling = args
    from fractions import Fraction
    policy = OccupationPolicy(filling=Fraction(*filling),
                              zero_mode=ZeroMode.AVERAGE,
                              complex_pair=_POLICY_MAP[policy_name])
    row = dot_occupancy_point(N, J, gamma_abs, phi, policy)
    row["policy"] = policy_name
    return row


def cmd_rlm_occupancy(config, out, threads):
    cfg = require_keys(config, RLM_SCHEMA, "rlm-occupancy")
    policies = cfg["policies"]
    if isinstance(policies, str):
        policies = [policies]
    for name in policies:
        if name not in _POLICY_MAP:
            raise ConfigError(f"unknown complex-pair policy {name!r}")
    phis = np.linspace(cfg["phi_min"], cfg["phi_max"], cfg["n_phi"])
    jobs = [(cfg["N"], cfg["J"], cfg["gamma_abs"], float(phi), name,
             (cfg["filling_num"], cfg["filling_den"]))
            for name in policies for phi in phis]
    rows = _pool_map(_rlm_worker, jobs, threads)
    meta = {"command": "rlm-occupancy", "N": cfg["N"], "J": cfg["J"],
            "gamma_abs": cfg["gamma_abs"],
            "filling": f"{cfg['filling_num']}/{cfg['filling_den']}"}
    write_csv(out, ["policy", "phi", "occ_hermitian", "occ_bio_re",
                    "occ_bio_im", "n_branches"], rows, meta)
    by_policy = {name: [r for r in rows if r["policy"] == name]
                 for name in policies}
    return rows, by_policy, {"N": cfg["N"], "gamma_abs": cfg["gamma_abs"]}


# -- critical-scan ----------------------------------------------------------------

CRITICAL_SCHEMA = {
    "N": (20002, int),
    "J": (1.0, float),
    "deltas": ([0.2], None),
    "delta_s": (1e-8, float),
    "m_max": (400, int),
    "convergence": (True, None),
    "convergence_delta_s": ([1e-4, 1e-6, 1e-8], None),
    "convergence_m": (20, int),
    "convergence_rtol": (1e-3, float),
    "convergence_N0": (402, int),
    "g_convergence": (0.2, float),
}


def _critical_worker(args):
    N, J, delta, delta_s, m_max = args
    p = ChainParams(N=N, J=J, g_onsite=delta + delta_s, delta=delta)
    rows = critical_green_scan(p, m_max)
    ms = [r["m"] for r in rows]
    for key in ("S", "F", "S_pt", "F_pt"):
        der = double_log_derivative(ms, [r[key] for r in rows])
        for r, d in zip(rows, der):
            r[f"dlog_{key}"] = d
    for r in rows:
        r["delta"] = delta
    return rows


def cmd_critical_scan(config, out, threads):
    cfg = require_keys(config, CRITICAL_SCHEMA, "critical-scan")
    deltas = cfg["deltas"]
    if not isinstance(deltas, list):
        deltas = [deltas]
    deltas = [float(d) for d in deltas]
    jobs = [(cfg["N"], cfg["J"], d, cfg["delta_s"], cfg["m_max"])
            for d in deltas]
    results = _pool_map(_critical_worker, jobs, threads)
    rows = [r for chunk in results for r in chunk]
    meta = {"command": "critical-scan", "model": "staggered-chain",
            "N": cfg["N"], "delta_s": cfg["delta_s"], "J": cfg["J"]}
    columns = ["delta", "m", "S", "F", "S_pt", "F_pt",
               "dlog_S", "dlog_F", "dlog_S_pt", "dlog_F_pt"]
    write_csv(out, columns, rows, meta)

    conv_rows = []
    if cfg["convergence"]:
        ds_list = cfg["convergence_delta_s"]
        if not isinstance(ds_list, list):
            ds_list = [ds_list]
        conv_rows = pt_convergence_scan(
            cfg["g_convergence"], [float(d) for d in ds_list],
            m_probe=cfg["convergence_m"], rtol=cfg["convergence_rtol"],
            N0=cfg["convergence_N0"])
        conv_path = Path(out).with_name(Path(out).stem + "_convergence.csv")
        write_csv(conv_path,
                  ["delta_s", "minus_log_delta_s", "N_converged", "G_pt_abs"],
                  conv_rows, {"command": "critical-scan/convergence",
                              "g": cfg["g_convergence"],
                              "m_probe": cfg["convergence_m"],
                              "rtol": cfg["convergence_rtol"]})
    by_delta = {d: [r for r in rows if r["delta"] == d] for d in deltas}
    return rows, conv_rows, by_delta, {"N": cfg["N"], "delta_s": cfg["delta_s"]}


# -- driver -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhqm",
        description="non-Hermitian lattice model toolbox (reports as CSV+PNG)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("two-level", "ancilla-verify", "rlm-occupancy", "critical-scan"):
        cp = sub.add_parser(name)
        cp.add_argument("--config", required=False, default=None,
                        help="key = value config file (defaults if omitted)")
        cp.add_argument("--out", default=None, help="output path")
        cp.add_argument("--threads", type=int,
                        default=max(1, os.cpu_count() or 1))
        cp.add_argument("--override", action="append", default=[],
                        metavar="key=value")
        cp.add_argument("--no-figure", action="store_true",
                        help="skip PNG rendering")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config) if args.config else {}
        config = apply_overrides(config, args.override)
        default_out = {
            "two-level": "two_level.csv",
            "ancilla-verify": "ancilla_verify.json",
            "rlm-occupancy": "rlm_occupancy.csv",
            "critical-scan": "critical_scan.csv",
        }[args.command]
        out = Path(args.out) if args.out else Path(default_out)
        out.parent.mkdir(parents=True, exist_ok=True)

        if args.command == "two-level":
            rows, params = cmd_two_level(config, out, args.threads)
            if not args.no_figure:
                figures.plot_two_level(rows, figures.figure_path(out), params)
        elif args.command == "ancilla-verify":
            report = cmd_ancilla_verify(config, out, args.threads)
            print(json.dumps(report, indent=2, sort_keys=True))
        elif args.command == "rlm-occupancy":
            rows, by_policy, params = cmd_rlm_occupancy(config, out, args.threads)
            if not args.no_figure:
                figures.plot_rlm_occupancy(by_policy, figures.figure_path(out),
                                           params)
        elif args.command == "critical-scan":
            rows, conv, by_delta, params = cmd_critical_scan(
                config, out, args.threads)
            if not args.no_figure:
                figures.plot_critical_scan(by_delta, figures.figure_path(out),
                                           params)
                if conv:
                    conv_png = Path(out).with_name(
                        Path(out).stem + "_convergence.png")
                    figures.plot_convergence(conv, conv_png)
        print(f"wrote {out}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except PreconditionError as exc:
        print(f"precondition violated: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
