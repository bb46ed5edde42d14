"""Declarative scenarios: JSON documents that name a computation and its parameters.

A scenario is ``{"kind": ..., "name": ..., "parameters": {...}, "output_path": ...}``.
:func:`execute` turns one into a set of CSV texts plus summary lines without
touching the file system, so a failing scenario never leaves partial output.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import control, models, spatial, subspaces, survival, zeno_limit
from .errors import ConfigError, InvariantViolation
from .linops import (
    make_rng,
    random_hermitian,
    random_state,
    matrix_from_dict,
    max_abs,
    pure_density,
    state_from_dict,
    unitary_defect,
)
from .tables import csv_text

KINDS = (
    "survival",
    "zeno-product",
    "subspaces",
    "kicks",
    "continuous",
    "hybrid-equivalence",
    "spatial",
    "translation-demo",
)

UNITARITY_TOL = 1e-9


@dataclass
class Scenario:
    kind: str
    parameters: dict
    output_path: str = "out"
    name: str = ""
    description: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not isinstance(self.parameters, dict):
            raise ConfigError("parameters must be a JSON object")
        missing = [k for k in REQUIRED[self.kind] if k not in self.parameters]
        if missing:
            raise ConfigError(f"{self.kind} scenario is missing required keys: {', '.join(missing)}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "description": self.description,
            "parameters": copy.deepcopy(self.parameters),
            "output_path": self.output_path,
        }

    @classmethod
    def from_dict(cls, doc) -> "Scenario":
        if not isinstance(doc, dict):
            raise ConfigError("a scenario config must be a JSON object")
        unknown = set(doc) - {"kind", "name", "description", "parameters", "output_path"}
        if unknown:
            raise ConfigError(f"unknown top-level keys: {', '.join(sorted(unknown))}")
        if "kind" not in doc:
            raise ConfigError("config has no 'kind'")
        return cls(
            kind=doc["kind"],
            parameters=copy.deepcopy(doc.get("parameters", {})),
            output_path=str(doc.get("output_path", "out")),
            name=str(doc.get("name", "")),
            description=str(doc.get("description", "")),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from exc
        return cls.from_dict(doc)


def load(path) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return Scenario.from_json(text)


def save(scenario: Scenario, path):
    with open(path, "w") as fh:
        fh.write(scenario.to_json())


REQUIRED = {
    "survival": ("model", "t", "N_list"),
    "zeno-product": ("model", "t", "N_list"),
    "subspaces": ("model", "t", "N_list"),
    "kicks": ("t", "N_list"),
    "continuous": ("t", "K_list"),
    "hybrid-equivalence": ("t", "K_list", "tau_list", "tau0"),
    "spatial": ("n_points", "box_length", "window", "t", "N_list"),
    "translation-demo": ("n_points", "box_length", "window", "t", "s"),
}


@dataclass
class Outcome:
    files: dict = field(default_factory=dict)
    summary: list = field(default_factory=list)

    def table(self, name, header, rows):
        self.files[name] = csv_text(header, rows)

    def note(self, key, value):
        if isinstance(value, float):
            value = format(value, ".17g")
        self.summary.append(f"{key}: {value}")


def _get(p: dict, key, cast=float, default=None):
    if key not in p:
        if default is None:
            raise ConfigError(f"missing parameter {key!r}")
        return default
    try:
        return cast(p[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter {key!r}: {exc}") from exc


def _int_list(p, key):
    vals = p[key]
    if not isinstance(vals, list) or not vals:
        raise ConfigError(f"{key} must be a non-empty list")
    out = []
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v or v < 1:
            raise ConfigError(f"{key} entries must be positive integers, got {v!r}")
        out.append(int(v))
    return out


def _float_list(p, key):
    vals = p[key]
    if not isinstance(vals, list) or not vals:
        raise ConfigError(f"{key} must be a non-empty list")
    try:
        return [float(v) for v in vals]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _linspace(p, key):
    spec = p[key]
    try:
        return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be {{start, stop, num}}: {exc}") from exc


def _system(p: dict):
    """``(H, psi0, P)`` for the configured model; ``P`` projects on ``psi0``'s sector."""
    model = p["model"]
    if model == "rabi":
        h = models.rabi_hamiltonian(_get(p, "omega", default=1.0))
        psi = models.PLUS.copy()
        return h, psi, np.outer(psi, psi.conj())
    if model == "three-level":
        h = models.three_level_hamiltonian(_get(p, "omega1", default=1.0), _get(p, "omega2", default=1.0))
        p1, _ = models.three_level_partition()
        return h, np.array([1, 0, 0], dtype=np.complex128), p1
    if model == "friedrichs":
        chain = models.FriedrichsChain(
            n_band=_get(p, "n_band", int, 40),
            bandwidth=_get(p, "bandwidth", default=4.0),
            coupling=_get(p, "coupling", default=0.03),
            omega0=_get(p, "omega0", default=0.0),
            edge_enhancement=_get(p, "edge_enhancement", default=3.0),
        )
        psi = chain.initial_state()
        return chain.hamiltonian(), psi, np.outer(psi, psi.conj())
    if model == "random":
        rng = make_rng(_get(p, "seed", int, 0))
        dim = _get(p, "dim", int, 4)
        h = random_hermitian(rng, dim)
        psi = random_state(rng, dim)
        return h, psi, np.outer(psi, psi.conj())
    if model == "matrix":
        if "hamiltonian" not in p or "state" not in p:
            raise ConfigError("model 'matrix' needs 'hamiltonian' and 'state'")
        h = matrix_from_dict(p["hamiltonian"])
        psi = state_from_dict(p["state"], normalize_input=bool(p.get("normalize_state", False)))
        return h, psi, np.outer(psi, psi.conj())
    raise ConfigError(f"unknown model {model!r}")


def _assert_unitary(u, what):
    d = unitary_defect(u)
    if d > UNITARITY_TOL:
        raise InvariantViolation("unitarity", f"{what}: ||U^dagger U - 1|| = {d:.3e}")


def _run_survival(p, out: Outcome):
    h, psi, _ = _system(p)
    dec = survival.spectral(h)
    t = _get(p, "t")
    out.note("tau_Z", survival.zeno_time(h, psi))
    out.table(
        "measured_survival.csv",
        ["N", "p_N"],
        [(n, survival.survival_after_measurements(dec, psi, n, t)) for n in _int_list(p, "N_list")],
    )
    if "times" in p:
        curve = survival.survival_curve(dec, psi, _linspace(p, "times"))
        out.table("survival.csv", ["t", "p"], zip(curve.times, curve.probabilities))
        gamma = None
        if "fit_window" in p:
            gamma, z = survival.estimate_asymptotic_rate(curve, _float_list(p, "fit_window"))
            out.note("gamma_fit", gamma)
            out.note("Z_fit", z)
        if "taus" in p:
            prof = survival.decay_rate_profile(dec, psi, _linspace(p, "taus"), gamma)
            out.table("gamma_eff.csv", ["tau", "gamma_eff"], zip(prof.taus, prof.gamma_eff))
        if gamma is not None and "bracket" in p:
            tau_star = survival.find_transition_time(dec, psi, gamma, _float_list(p, "bracket"))
            out.note("tau_star", "none" if tau_star is None else tau_star)


def _run_zeno_product(p, out: Outcome):
    h, _, proj = _system(p)
    res = zeno_limit.convergence_profile(h, proj, _get(p, "t"), _int_list(p, "N_list"))
    out.table(
        "zeno_product.csv",
        ["N", "defect_max", "defect_opnorm", "survival"],
        [(r.N, r.defect, r.defect_opnorm, r.survival) for r in res],
    )
    out.note("defect_at_largest_N", res[-1].defect)


def _initial_density(p, psi):
    if "rho0" in p:
        return matrix_from_dict(p["rho0"])
    return pure_density(psi)


def _run_subspaces(p, out: Outcome):
    if p["model"] != "three-level":
        raise ConfigError("subspaces scenarios support model 'three-level'")
    h, psi, _ = _system(p)
    part = subspaces.ZenoPartition(models.three_level_partition())
    rho0 = _initial_density(p, psi)
    t = _get(p, "t")
    p0 = subspaces.sector_probabilities(subspaces.nonselective_project(rho0, part), part)
    limit = subspaces.zeno_limit_channel(rho0, h, part, t)
    rows = []
    for n in _int_list(p, "N_list"):
        rho = subspaces.evolve_with_measurements(rho0, h, part, n, t)
        pn = subspaces.sector_probabilities(rho, part)
        rows.append((n, float(np.max(np.abs(pn - p0))), max_abs(rho - limit), subspaces.purity(rho)))
    out.table("leakage.csv", ["N", "leakage", "defect_vs_limit", "purity"], rows)
    times, states = subspaces.measurement_trajectory(rho0, h, part, rows[-1][0], t)
    k = len(part)
    out.table(
        "sectors.csv",
        ["t"] + [f"p_{i + 1}" for i in range(k)] + ["purity"],
        [[tt, *subspaces.sector_probabilities(r, part), subspaces.purity(r)] for tt, r in zip(times, states)],
    )
    drift = float(np.max(np.abs(subspaces.sector_probabilities(limit, part) - p0)))
    if drift > 1e-10:
        raise InvariantViolation("sector conservation", f"limit channel moved sector weight by {drift:.3e}")
    out.note("limit_sector_drift", drift)


def _four_level(p):
    return models.four_level_hamiltonian(_get(p, "omega1", default=1.0), _get(p, "omega2", default=1.0))


def _run_kicks(p, out: Outcome):
    h = _four_level(p)
    lam = _get(p, "lambda", default=math.pi / 2)
    kick = control.KickSpec.from_unitary(models.kick_unitary(lam))
    t = _get(p, "t")
    hz = control.kick_zeno_hamiltonian(h, kick)
    uz = control.propagator(hz, t)
    rows = []
    for n in _int_list(p, "N_list"):
        u = control.kicked_evolution(h, kick, n, t)
        _assert_unitary(u, f"kicked evolution N={n}")
        ref = models.four_level_asymptotic(_get(p, "omega1", default=1.0), t, n * lam)
        rows.append((n, max_abs(u - ref), max_abs(control.kick_frame_limit(h, kick, n, t) - uz)))
    out.table("kicks.csv", ["N", "defect_vs_asymptotic", "defect_vs_HZ"], rows)
    out.note("zeno_hamiltonian_offdiag_ab", float(hz[0, 1].real))


def _run_continuous(p, out: Outcome):
    h = _four_level(p)
    coupling = control.CouplingSpec.from_hamiltonian(models.ancilla_coupling())
    t = _get(p, "t")
    uz = control.propagator(control.coupling_zeno_hamiltonian(h, coupling), t)
    rows = []
    for k in _float_list(p, "K_list"):
        u = control.continuous_evolution(h, coupling, k, t)
        _assert_unitary(u, f"continuous evolution K={k}")
        ref = models.four_level_asymptotic(_get(p, "omega1", default=1.0), t, k * t)
        rows.append((k, max_abs(u - ref), max_abs(control.coupling_frame_limit(h, coupling, k, t) - uz)))
    out.table("continuous.csv", ["K", "defect_vs_asymptotic", "defect_vs_HZ"], rows)


def _run_hybrid(p, out: Outcome):
    h = _four_level(p)
    coupling = control.CouplingSpec.from_hamiltonian(models.ancilla_coupling())
    rows = control.limit_interchange_report(
        h,
        coupling,
        _get(p, "t"),
        sorted(_float_list(p, "K_list")),
        sorted(_float_list(p, "tau_list"), reverse=True),
        tau0=_get(p, "tau0"),
        workers=_get(p, "workers", int, 1),
    )
    out.table(
        "interchange.csv",
        ["K", "tau", "offdiag_norm_order_KT", "offdiag_norm_order_TK", "defect_vs_HZ"],
        [(r.K, r.tau, r.offdiag_KT, r.offdiag_TK, r.defect_vs_HZ) for r in rows],
    )
    _, d_kt, _, d_tk = control.route_sequences(rows)
    out.note("defect_order_KT", " ".join(format(x, ".6g") for x in d_kt))
    out.note("defect_order_TK", " ".join(format(x, ".6g") for x in d_tk))


def _grid_window(p, centered=True):
    grid = spatial.Grid1D(_get(p, "n_points", int), _get(p, "box_length"), _get(p, "mass", default=1.0))
    a, b = _float_list(p, "window")
    w = spatial.Window.interior(grid, a, b) if centered else spatial.Window.span(grid, a, b)
    return grid, w


def _run_spatial(p, out: Outcome):
    grid, w = _grid_window(p)
    t = _get(p, "t")
    psi0 = spatial.dirichlet_mode(grid, w, _get(p, "mode", int, 0))
    stepper = spatial.ZenoStepper(grid, w)
    ref = spatial.dirichlet_propagate(grid, w, psi0, t)
    t_avg = _get(p, "t_avg", default=t)
    rows, last = [], None
    for n in _int_list(p, "N_list"):
        z, norms = stepper.run(n, t, psi0, return_norms=True)
        if np.any(np.diff(norms) > 1e-12):
            raise InvariantViolation("contraction", f"norm grew during the N={n} product")
        tad = spatial.time_averaged_defect(grid, w, n, t_avg, psi0, samples=_get(p, "samples", int, 9))
        rows.append((n, spatial.fidelity(ref, z), float(np.linalg.norm(z) ** 2), tad))
        last = z
    out.table("spatial.csv", ["N", "fidelity", "survival", "time_avg_defect"], rows)
    out.table(
        "wavefunction.csv",
        ["x", "re_psi", "im_psi", "abs2"],
        zip(grid.x, last.real, last.imag, np.abs(last) ** 2),
    )
    e = spatial.dirichlet_spectrum(grid, w).eigenvalues
    out.note("dirichlet_E1", float(e[0]))
    out.note("box_E1", float(spatial.box_levels(1, w.box_width(grid), grid.mass)))


def _run_translation(p, out: Outcome):
    grid, w = _grid_window(p, centered=False)
    rep = spatial.translation_semigroup_demo(grid, w, _get(p, "t"), _get(p, "s"))
    out.table(
        "translation.csv",
        ["t", "s", "semigroup_defect", "survival", "survival_exact", "n_independence_defect"],
        [(rep.t, rep.s, rep.semigroup_defect, rep.survival, rep.survival_exact, rep.n_independence_defect)],
    )
    if rep.semigroup_defect > 1e-9:
        raise InvariantViolation("semigroup identity", f"defect {rep.semigroup_defect:.3e}")
    out.note("n_independent", rep.n_independent)


RUNNERS: dict[str, Callable] = {
    "survival": _run_survival,
    "zeno-product": _run_zeno_product,
    "subspaces": _run_subspaces,
    "kicks": _run_kicks,
    "continuous": _run_continuous,
    "hybrid-equivalence": _run_hybrid,
    "spatial": _run_spatial,
    "translation-demo": _run_translation,
}


def execute(scenario: Scenario) -> Outcome:
    """Run a scenario in memory.  Raises :class:`ValidationError` or :class:`InvariantViolation`."""
    out = Outcome()
    out.note("scenario", scenario.name or scenario.kind)
    out.note("kind", scenario.kind)
    try:
        RUNNERS[scenario.kind](scenario.parameters, out)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad parameters for {scenario.kind}: {exc!r}") from exc
    return out


def _preset(name, kind, description, **parameters) -> Scenario:
    return Scenario(kind, parameters, output_path=f"out/{name}", name=name, description=description)


PRESETS = {
    s.name: s
    for s in (
        _preset(
            "two-level-rabi",
            "survival",
            "Rabi oscillator H = Omega sigma_1 checked N times in t = 1",
            model="rabi", omega=1.0, t=1.0, N_list=[1, 5, 50, 500, 1000],
            times={"start": 0.0, "stop": 3.0, "num": 61},
        ),
        _preset(
            "three-level-projective",
            "subspaces",
            "3-level chain under nonselective measurement of {|a>,|b>} vs {|c>}",
            model="three-level", omega1=1.0, omega2=1.0, t=1.0, N_list=[250, 500, 1000, 2000],
        ),
        _preset(
            "itano-4level",
            "kicks",
            "4-level chain with bang-bang kicks on the |c>-|M> transition",
            omega1=1.0, omega2=1.0, t=1.0, N_list=[100, 200, 400], **{"lambda": math.pi / 2},
        ),
        _preset(
            "ketterle-4level",
            "continuous",
            "4-level chain with strong continuous |c>-|M> coupling",
            omega1=1.0, omega2=1.0, t=1.0, K_list=[50.0, 100.0, 200.0],
        ),
        _preset(
            "friedrichs-ize",
            "survival",
            "level coupled to a finite band: Zeno and inverse Zeno regimes and tau*",
            model="friedrichs", n_band=40, bandwidth=4.0, coupling=0.03, omega0=0.0,
            edge_enhancement=3.0, t=1.0, N_list=[1, 2, 5, 10],
            times={"start": 0.0, "stop": 40.0, "num": 401},
            taus={"start": 0.05, "stop": 10.0, "num": 200},
            fit_window=[5.0, 40.0], bracket=[0.05, 10.0],
        ),
        _preset(
            "dirichlet-box",
            "spatial",
            "free particle watched in a window of width 1: convergence to hard walls",
            n_points=512, box_length=2.0, mass=1.0, window=[0.5, 1.5], t=0.2,
            N_list=[500, 1000, 2000, 4000],
        ),
        _preset(
            "translation-semigroup",
            "translation-demo",
            "H = p projected on a window: a semigroup that is not unitary",
            n_points=512, box_length=2.0, window=[0.5, 1.5], t=0.25, s=0.125,
        ),
        _preset(
            "hybrid-equivalence",
            "hybrid-equivalence",
            "pulsed and continuous limits of the 4-level hybrid H(tau, K)",
            omega1=1.0, omega2=1.0, t=1.0, K_list=[32.0, 64.0, 128.0],
            tau_list=[1 / 32, 1 / 64, 1 / 128], tau0=1.0,
        ),
    )
}
