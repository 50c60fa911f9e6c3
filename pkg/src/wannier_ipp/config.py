"""Run configurations and the named presets.

A configuration is one JSON document.  Complex parameters are written as
``{"re": x, "im": y}``.  Presets are the single source of the parameter sets
used by the command-line driver and the test suite.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import List, Optional, Union

from .errors import ConfigError
from .ipp import GapPolicy
from .lattice import LatticeSpec
from .models import DisorderSpec
from .position import PositionSpec

MODELS = ("haldane", "kane_mele", "pxipy")
MODEL_PARAMS = {
    "haldane": ("v", "t", "tprime"),
    "kane_mele": ("v", "t", "tprime", "lambda_R"),
    "pxipy": ("mu", "t", "Delta"),
}

DEFAULT_SEED = 20211


def _seq(functional: str, trb: bool = False) -> List[PositionSpec]:
    return [PositionSpec(functional, 1, trb), PositionSpec(functional, 2, trb)]


def _sincos(trb: bool) -> List[PositionSpec]:
    return [PositionSpec("sin", 1, trb), PositionSpec("cos", 1, trb),
            PositionSpec("sin", 2, trb), PositionSpec("cos", 2, trb)]


SEQUENCES = {
    "dirichlet_xy": _seq("linear"),
    "periodic_exp": _seq("complex_exp"),
    "trs_sincos": _sincos(False),
    "z2_odd_sincos_trb": _sincos(True),
}


def resolve_sequence(seq) -> List[PositionSpec]:
    if isinstance(seq, str):
        if seq not in SEQUENCES:
            raise ConfigError(f"unknown sequence preset {seq!r}; known: {sorted(SEQUENCES)}")
        return list(SEQUENCES[seq])
    out = []
    for i, s in enumerate(seq):
        if isinstance(s, PositionSpec):
            out.append(s)
        elif isinstance(s, dict):
            try:
                out.append(PositionSpec.from_dict(s))
            except TypeError as exc:
                raise ConfigError(f"sequence[{i}]: {exc}") from None
        else:
            raise ConfigError(f"sequence[{i}]: expected an object, got {type(s).__name__}")
    for s in out:
        s.validate()
    return out


def _encode(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


def _decode(v):
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        c = complex(v["re"], v["im"])
        return c
    return v


@dataclass
class WccOptions:
    L1: int = 10
    n_k: int = 128
    trb: bool = False

    def to_dict(self) -> dict:
        return {"L1": self.L1, "n_k": self.n_k, "trb": self.trb}


@dataclass
class RunConfig:
    model: str
    parameters: dict
    lattice: LatticeSpec
    sequence: Union[str, list] = "dirichlet_xy"
    disorder: Optional[DisorderSpec] = None
    gap_policy: GapPolicy = field(default_factory=GapPolicy)
    outputs: str = "out"
    n_occ: Optional[int] = None
    threads: int = 1
    wcc: WccOptions = field(default_factory=WccOptions)
    name: str = ""

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"model: unknown model {self.model!r}")
        need = MODEL_PARAMS[self.model]
        missing = [k for k in need if k not in self.parameters]
        extra = [k for k in self.parameters if k not in need]
        if missing:
            raise ConfigError(f"parameters: missing {missing} for {self.model}")
        if extra:
            raise ConfigError(f"parameters: unexpected {extra} for {self.model}")
        for k, v in self.parameters.items():
            if not isinstance(v, (int, float, complex)) or isinstance(v, bool):
                raise ConfigError(f"parameters.{k}: expected a number")
            if isinstance(v, complex) and k != "tprime":
                raise ConfigError(f"parameters.{k}: only tprime may be complex")
        if self.model == "kane_mele" and isinstance(self.parameters["tprime"], complex):
            raise ConfigError("parameters.tprime: must be real for kane_mele")
        try:
            self.lattice.validate()
        except ConfigError as exc:
            raise ConfigError(f"lattice: {exc}") from None
        want = "ammann_beenker" if self.model == "pxipy" else "honeycomb"
        if self.lattice.kind != want:
            raise ConfigError(f"lattice.kind: {self.model} needs {want}")
        if self.disorder is not None and self.disorder.variance < 0:
            raise ConfigError("disorder.variance: must be >= 0")
        try:
            self.gap_policy.validate()
        except ConfigError as exc:
            raise ConfigError(f"gap_policy: {exc}") from None
        seq = resolve_sequence(self.sequence)
        if len(seq) < 2:
            raise ConfigError("sequence: needs at least two observables")
        if any(s.trb for s in seq) and self.model != "kane_mele":
            raise ConfigError("sequence: trb needs kane_mele")
        if any(s.periodic for s in seq) and self.lattice.kind != "honeycomb":
            raise ConfigError("sequence: periodic functionals need a honeycomb lattice")
        if self.n_occ is not None and self.n_occ < 0:
            raise ConfigError("n_occ: must be >= 0")
        if self.threads < 1:
            raise ConfigError("threads: must be >= 1")
        if self.wcc.n_k < 32 or self.wcc.n_k % 2:
            raise ConfigError("wcc.n_k: must be even and >= 32")
        if self.wcc.L1 < 2:
            raise ConfigError("wcc.L1: must be >= 2")

    @property
    def positions(self) -> List[PositionSpec]:
        return resolve_sequence(self.sequence)

    @property
    def seed(self) -> Optional[int]:
        return None if self.disorder is None else self.disorder.seed

    def to_dict(self) -> dict:
        seq = self.sequence if isinstance(self.sequence, str) else \
            [s.to_dict() if isinstance(s, PositionSpec) else dict(s) for s in self.sequence]
        return {
            "name": self.name,
            "model": self.model,
            "parameters": {k: _encode(v) for k, v in self.parameters.items()},
            "lattice": self.lattice.to_dict(),
            "disorder": None if self.disorder is None else self.disorder.to_dict(),
            "sequence": seq,
            "gap_policy": self.gap_policy.to_dict(),
            "outputs": self.outputs,
            "n_occ": self.n_occ,
            "threads": self.threads,
            "wcc": self.wcc.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"name", "model", "parameters", "lattice", "disorder", "sequence", "gap_policy",
                 "outputs", "n_occ", "threads", "wcc", "preset"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields {sorted(extra)}")
        if "preset" in d:
            base = preset(d["preset"]).to_dict()
            base.update({k: v for k, v in d.items() if k != "preset"})
            d = base
        for key in ("model", "parameters", "lattice"):
            if key not in d:
                raise ConfigError(f"{key}: required field missing")

        def sub(name, factory, value):
            try:
                return factory(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{name}: {exc}") from None

        params = d["parameters"]
        if not isinstance(params, dict):
            raise ConfigError("parameters: expected an object")
        cfg = cls(
            name=d.get("name", ""),
            model=d["model"],
            parameters={k: _decode(v) for k, v in params.items()},
            lattice=sub("lattice", lambda v: LatticeSpec.from_dict(v), d["lattice"]),
            disorder=None if d.get("disorder") is None else
            sub("disorder", lambda v: DisorderSpec(**v), d["disorder"]),
            sequence=d.get("sequence", "dirichlet_xy"),
            gap_policy=sub("gap_policy", lambda v: GapPolicy.from_dict(v),
                           d.get("gap_policy", GapPolicy().to_dict())),
            outputs=d.get("outputs", "out"),
            n_occ=d.get("n_occ"),
            threads=d.get("threads", 1),
            wcc=sub("wcc", lambda v: WccOptions(**v), d.get("wcc", WccOptions().to_dict())),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(d)

    def replace(self, **kw) -> "RunConfig":
        c = copy.deepcopy(self)
        for k, v in kw.items():
            setattr(c, k, v)
        return c


# ------------------------------------------------------------------ presets

def _hc(L1, L2, boundary):
    return LatticeSpec("honeycomb", L1, L2, 0, boundary)


HALDANE_TRIVIAL = {"v": 3.0, "t": 1.0, "tprime": 0.5}
HALDANE_TOPOLOGICAL = {"v": 0.0, "t": 1.0, "tprime": 0.5}
HALDANE_BOSONIC = {"v": 3.0, "t": 1.0, "tprime": 0.5j}
KM_EVEN = {"v": 4.0, "t": 1.0, "tprime": 0.6, "lambda_R": 0.5}
KM_ODD = {"v": 0.0, "t": 1.0, "tprime": 0.6, "lambda_R": 0.5}
PXIPY = {"mu": 3.0, "t": 0.5, "Delta": 1.0}
WEAK, STRONG = 0.5, 100.0
AB_STEPS = 3


def _presets() -> dict:
    P = {}

    def add(name, model, params, lattice, sequence, variance=None, **kw):
        dis = None if variance is None else DisorderSpec(variance, DEFAULT_SEED)
        P[name] = RunConfig(model=model, parameters=dict(params), lattice=lattice,
                            sequence=sequence, disorder=dis, name=name, **kw)

    # the ten numerical scenarios
    add("km_dirichlet", "kane_mele", KM_EVEN, _hc(30, 30, "dirichlet"), "dirichlet_xy")
    add("km_dirichlet_weak", "kane_mele", KM_EVEN, _hc(30, 30, "dirichlet"), "dirichlet_xy", WEAK)
    add("pxipy_ammann_beenker", "pxipy", PXIPY,
        LatticeSpec("ammann_beenker", 0, 0, AB_STEPS, "dirichlet"), "dirichlet_xy",
        gap_policy=GapPolicy(mode="relative"))
    add("haldane_periodic", "haldane", HALDANE_TRIVIAL, _hc(30, 30, "periodic"), "periodic_exp")
    add("haldane_periodic_weak", "haldane", HALDANE_TRIVIAL, _hc(30, 30, "periodic"),
        "periodic_exp", WEAK)
    add("haldane_periodic_strong", "haldane", HALDANE_TRIVIAL, _hc(30, 30, "periodic"),
        "periodic_exp", STRONG, gap_policy=GapPolicy(mode="relative"))
    add("haldane_bosonic", "haldane", HALDANE_BOSONIC, _hc(30, 30, "periodic"), "trs_sincos")
    add("km_z2_even", "kane_mele", KM_EVEN, _hc(30, 30, "periodic"), "trs_sincos")
    add("km_z2_odd", "kane_mele", KM_ODD, _hc(30, 30, "periodic"), "z2_odd_sincos_trb")
    add("km_z2_odd_weak", "kane_mele", KM_ODD, _hc(30, 30, "periodic"), "z2_odd_sincos_trb", WEAK)

    # auxiliary systems
    add("haldane_dirichlet_12", "haldane", HALDANE_TRIVIAL, _hc(12, 12, "dirichlet"), "dirichlet_xy")
    add("haldane_small_4", "haldane", HALDANE_TRIVIAL, _hc(4, 4, "periodic"), "periodic_exp")
    add("km_z2_odd_no_trb", "kane_mele", KM_ODD, _hc(30, 30, "periodic"), "trs_sincos")
    add("haldane_periodic_bare_x", "haldane", HALDANE_TRIVIAL, _hc(30, 30, "periodic"), "dirichlet_xy")
    add("haldane_wcc_trivial", "haldane", HALDANE_TRIVIAL, _hc(10, 10, "periodic"), "periodic_exp")
    add("haldane_wcc_topological", "haldane", HALDANE_TOPOLOGICAL, _hc(10, 10, "periodic"),
        "periodic_exp")
    add("km_wcc_even", "kane_mele", KM_EVEN, _hc(10, 10, "periodic"), "trs_sincos")
    add("km_wcc_odd", "kane_mele", KM_ODD, _hc(10, 10, "periodic"), "trs_sincos")
    add("km_wcc_odd_trb", "kane_mele", KM_ODD, _hc(10, 10, "periodic"), "z2_odd_sincos_trb",
        wcc=WccOptions(trb=True))
    return P


PRESETS = _presets()
SCENARIOS = ("km_dirichlet", "km_dirichlet_weak", "pxipy_ammann_beenker", "haldane_periodic",
             "haldane_periodic_weak", "haldane_periodic_strong", "haldane_bosonic", "km_z2_even",
             "km_z2_odd", "km_z2_odd_weak")


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])
