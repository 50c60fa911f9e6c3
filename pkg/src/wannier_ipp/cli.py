"""Command-line driver: ``wannier-ipp <spectrum|ipp|wcc|diagnose>``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import io
from .config import PRESETS, RunConfig, preset
from .diagnostics import (cell_norm_matrix, localization_report, mv_decomposition,
                          position_diagonals, site_norms, symmetry_checks)
from .errors import ConfigError, IPPError, NoUniformGaps
from .ipp import GapPolicy, detect_uniform_gaps, max_clusters, split_frame
from .linalg import hermitian_eig, general_eig, restricted_operator
from .models import PRNG_NAME, layout_for
from .pipeline import System, build_system, run
from .position import build_observable, display_arcsin, sort_key
from .wcc import bloch_family, chern_from_winding, wcc_sweep, z2_from_wcc

ORTHO_TOL_HERMITIAN = 1e-8
ORTHO_TOL_UNITARY = 1e-6
SPAN_TOL = 1e-6


def load_config(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.preset:
        cfg = preset(args.preset)
    elif args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = RunConfig.from_json(text)
    else:
        raise ConfigError("a --config file or --preset name is required")
    if args.out:
        cfg.outputs = args.out
    if args.threads:
        cfg.threads = args.threads
    cfg.validate()
    return cfg


def symmetry_class(cfg: RunConfig) -> Optional[str]:
    seq = cfg.positions
    clean = cfg.disorder is None or cfg.disorder.variance == 0
    if cfg.model == "haldane":
        tp = complex(cfg.parameters["tprime"])
        if tp.real == 0:
            return "bosonic"
        if cfg.lattice.boundary == "periodic" and clean and \
                all(s.functional == "complex_exp" for s in seq):
            return "translation"
    if cfg.model == "kane_mele" and clean and not any(s.trb for s in seq):
        return "fermionic"
    return None


class Run:
    """Collects written files and timing for the manifest."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.outputs)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: List[Path] = []
        self.t0 = time.perf_counter()
        self.tolerances = {}

    def add(self, p: Path) -> Path:
        self.files.append(Path(p))
        return p

    def finish(self, status: str, extra: dict = None) -> None:
        seeds = {"disorder_seed": self.cfg.seed, "prng": PRNG_NAME}
        io.write_manifest(self.out, self.cfg.to_dict(), seeds, self.tolerances,
                          time.perf_counter() - self.t0, self.files, status, extra)


def _first_stage(system: System):
    cfg = system.config
    obs = build_observable(cfg.positions[0], system.lattice, cfg.model)
    M = restricted_operator(system.frame, obs.operator())
    eig = hermitian_eig(0.5 * (M + M.conj().T)) if obs.hermitian else general_eig(M)
    sk = sort_key(eig.values, obs.spec.sort_kind)
    return obs, eig, sk


def cmd_spectrum(cfg: RunConfig) -> int:
    run_ = Run(cfg)
    system = build_system(cfg)
    policy = cfg.gap_policy
    status, code, ids = "ok", 0, None
    values = np.zeros(0)
    keys = np.zeros(0)
    order = np.zeros(0, dtype=int)
    extra = {}
    if system.frame.rank:
        obs, eig, sk = _first_stage(system)
        values, keys, order = eig.values, sk.keys, sk.order
        try:
            kw = {}
            if policy.mode == "fixed_count":
                if policy.expected_cluster_count is not None:
                    kw["count"] = policy.expected_cluster_count
                else:
                    kw["max_count"] = max_clusters(obs, system.lattice)
            dec = detect_uniform_gaps(keys, policy, circular=not obs.hermitian, **kw)
            ids = np.empty(len(keys), dtype=int)
            for j, idx in enumerate(dec.clusters()):
                ids[idx] = j
            extra["gaps"] = dec.summary()
            run_.tolerances["min_inter_gap"] = dec.min_inter_gap
            run_.tolerances["max_intra_gap"] = dec.max_intra_gap
        except NoUniformGaps as exc:
            status, code = f"NoUniformGaps: {exc}", NoUniformGaps.exit_code
            extra["error"] = str(exc)
    ids = ids if ids is not None else -np.ones(len(keys), dtype=int)
    disp = display_arcsin(values) if cfg.positions[0].functional == "sin" else np.real(values)

    def rows():
        for r, i in enumerate(order):
            v = complex(values[i])
            yield r, v.real, v.imag, keys[i], disp[i], int(ids[i])
    run_.add(io.write_csv(run_.out / "spectrum.csv",
                          ["rank", "re", "im", "sort_key", "display", "cluster_id"], rows()))
    extra["n_occ"] = system.frame.rank
    run_.finish(status, extra)
    return code


def _function_reports(ws, system: System):
    reps = []
    for i in range(ws.n_functions):
        try:
            reps.append(localization_report(ws.functions[:, i], system.lattice, system.model,
                                            ws.centers[i]))
        except IPPError as exc:
            reps.append(exc)
    return reps


def _write_ipp_outputs(run_: Run, system: System, ws) -> dict:
    cfg = system.config
    lay = layout_for(cfg.model, system.lattice)
    run_.add(io.write_amplitudes(run_.out / "amplitudes.csv", ws.functions, lay.site))
    reps = _function_reports(ws, system)
    norm_dir = run_.out / ("cell_norms" if system.lattice.kind == "honeycomb" else "site_norms")
    # norms are written even when the decay fit had too few shells
    for i in range(ws.n_functions):
        w = ws.functions[:, i]
        if system.lattice.kind == "honeycomb":
            p = io.write_matrix_csv(norm_dir / f"function_{i:05d}.csv",
                                    cell_norm_matrix(w, system.lattice, cfg.model))
        else:
            pos = system.lattice.positions
            norms = site_norms(w, system.lattice, cfg.model)
            p = io.write_csv(norm_dir / f"function_{i:05d}.csv", ["site", "x", "y", "norm"],
                             ((j, pos[j, 0], pos[j, 1], norms[j]) for j in range(len(pos))))
        run_.add(p)
    ok = [r for r in reps if not isinstance(r, Exception)]
    hermitian = all(s.functional != "complex_exp" for s in cfg.positions)
    ortho_tol = ORTHO_TOL_HERMITIAN if hermitian else ORTHO_TOL_UNITARY
    diag = {
        "orthonormality_error": ws.metrics["orthonormality_error"],
        "orthonormality_tolerance": ortho_tol,
        "span_error": ws.metrics["span_error"],
        "span_tolerance": SPAN_TOL,
        "pre_loewdin_orthonormality_error": ws.metrics.get("pre_loewdin_orthonormality_error"),
        "decay_rates": [r.decay_rate for r in ok],
        "fit_r2": [r.fit_r2 for r in ok],
        "min_decay_rate": min((r.decay_rate for r in ok), default=None),
        "min_fit_r2": min((r.fit_r2 for r in ok), default=None),
        "fit_failures": [str(r) for r in reps if isinstance(r, Exception)],
        "stages": ws.stages,
    }
    sym = symmetry_class(cfg)
    if sym:
        diag["symmetry"] = symmetry_checks(ws, system.lattice, cfg.model, sym)
    run_.add(io.write_json(run_.out / "diagnostics.json", diag))
    meta = {
        "sequence": [s.to_dict() for s in ws.sequence],
        "gap_policy": cfg.gap_policy.to_dict(),
        "centers": ws.centers,
        "provenance": [list(p) for p in ws.provenance],
        "last_eigenvalues": [[complex(v).real, complex(v).imag] for v in ws.values],
        "seeds": {"disorder_seed": cfg.seed, "prng": PRNG_NAME},
        "tolerances_achieved": {"orthonormality_error": ws.metrics["orthonormality_error"],
                                "span_error": ws.metrics["span_error"]},
        "n_functions": ws.n_functions,
    }
    run_.add(io.write_json(run_.out / "wannier.json", meta))
    run_.tolerances.update(orthonormality_error=ws.metrics["orthonormality_error"],
                           span_error=ws.metrics["span_error"])
    return diag


def _hard_failures(diag: dict) -> list:
    bad = []
    if diag["orthonormality_error"] >= diag["orthonormality_tolerance"]:
        bad.append("orthonormality")
    if diag["span_error"] >= SPAN_TOL:
        bad.append("span")
    return bad


def cmd_ipp(cfg: RunConfig) -> int:
    run_ = Run(cfg)
    system = build_system(cfg)
    try:
        ws = run(system)
    except IPPError as exc:
        run_.finish(f"{type(exc).__name__}: {exc}")
        raise
    diag = _write_ipp_outputs(run_, system, ws)
    bad = _hard_failures(diag)
    run_.finish("ok" if not bad else f"tolerance failures: {bad}")
    if bad:
        print(f"error: tolerances not met: {bad}", file=sys.stderr)
        return 5
    return 0


def cmd_diagnose(cfg: RunConfig) -> int:
    run_ = Run(cfg)
    system = build_system(cfg)
    ws = run(system)
    diag = _write_ipp_outputs(run_, system, ws)
    X, Y = position_diagonals(system.lattice, cfg.model)
    mv = mv_decomposition(ws.functions, system.frame.columns, X, Y)
    rng = np.random.Generator(np.random.PCG64(0))
    r = ws.n_functions
    Z = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
    U, _ = np.linalg.qr(Z)
    mv_mixed = mv_decomposition(ws.functions @ U, system.frame.columns, X, Y)
    report = {
        "mv": mv.to_dict(),
        "mv_remix_invariant_difference": abs(mv.invariant_total - mv_mixed.invariant_total),
        "localization": diag,
    }
    run_.add(io.write_json(run_.out / "report.json", report))
    bad = _hard_failures(diag)
    if mv.identity_residual >= 1e-10:
        bad.append("mv_identity")
    run_.tolerances["mv_identity_residual"] = mv.identity_residual
    run_.finish("ok" if not bad else f"tolerance failures: {bad}")
    return 0 if not bad else 5


def cmd_wcc(cfg: RunConfig) -> int:
    if cfg.disorder is not None and cfg.disorder.variance > 0:
        raise ConfigError("wcc needs a clean model: disorder breaks translation symmetry along a2")
    if cfg.model == "pxipy":
        raise ConfigError("wcc needs a honeycomb model")
    run_ = Run(cfg)
    fam = bloch_family(cfg.model, cfg.parameters, cfg.wcc.L1, cfg.wcc.n_k)
    sweep = wcc_sweep(fam, trb=cfg.wcc.trb)
    run_.add(io.write_csv(run_.out / "wcc.csv", ["kappa2", "branch", "center"], sweep.rows()))
    inv = {"min_branch_gap": sweep.min_branch_gap, "L1": cfg.wcc.L1, "n_k": cfg.wcc.n_k,
           "trb": cfg.wcc.trb, "chern": None, "z2": None, "residuals": {}}
    strict = cfg.model == "haldane"
    ch = chern_from_winding(sweep, strict=strict)
    inv["chern"] = ch.chern
    inv["residuals"]["chern"] = ch.residual
    if cfg.model == "kane_mele" and not cfg.wcc.trb:
        z = z2_from_wcc(sweep)
        inv["z2"] = z.z2
        inv["residuals"]["z2"] = z.residual
    run_.add(io.write_json(run_.out / "invariants.json", inv))
    run_.finish("ok")
    return 0


COMMANDS = {"spectrum": cmd_spectrum, "ipp": cmd_ipp, "wcc": cmd_wcc, "diagnose": cmd_diagnose}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wannier-ipp",
                                description="Localized Wannier functions by iterated projected position.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="run configuration (JSON)")
        s.add_argument("--preset", choices=sorted(PRESETS), help="named preset instead of --config")
        s.add_argument("--out", help="output directory (overrides the config)")
        s.add_argument("--threads", type=int, help="BLAS threads (default 1)")
    sub.add_parser("presets", help="list preset names")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "presets":
        for name in sorted(PRESETS):
            print(name)
        return 0
    try:
        cfg = load_config(args)
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=cfg.threads):
            return COMMANDS[args.command](cfg)
    except IPPError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except json.JSONDecodeError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
