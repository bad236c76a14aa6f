"""Verification suites and machine-readable reports.

A scenario selects a catalog item and a suite; running it produces a Report
whose checks each carry a stable anchor string, the measured residual, the
tolerance, and the direction of the comparison.  Reports serialize to
canonical JSON so that identical scenario + seed gives byte-identical
hash-relevant output (timings and environment are excluded from the hash).
"""
from __future__ import annotations

import hashlib
import json
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import ambient as amb_mod
from .catalog import default_catalog
from .conformal import (conformal_flatness_test, immersion_curvature_provider,
                        lemma_q_suite)
from .errors import ConfigError, NotApplicable
from .extrinsic import fundamental_forms, normal_connection_and_curvature
from .jets import ChartDomain, SmoothMap, evaluate_jet
from .lightcone import (build_cone_model, flat_lift, lift_correspondence_check,
                        lift_second_fundamental_form, project_from_cone,
                        psi_second_fundamental_residual)
from .principal import (holonomicity_check, principal_decomposition,
                        properness_and_census, separation_check)

SCHEMA_VERSION = 1
SUITES = ("extrinsic", "principal", "conformal", "lightcone", "ribaucour")


@dataclass
class CheckResult:
    """One verified property: pass means residual <= tolerance for kind
    'max' and residual >= tolerance for kind 'min'."""

    name: str
    anchor: str
    residual: float
    tolerance: float
    kind: str = "max"
    passed: bool = False
    note: str = ""

    def evaluate(self):
        if self.kind == "max":
            self.passed = bool(self.residual <= self.tolerance)
        else:
            self.passed = bool(self.residual >= self.tolerance)
        return self

    def as_dict(self):
        return {"name": self.name, "anchor": self.anchor,
                "residual": float(self.residual),
                "tolerance": float(self.tolerance), "kind": self.kind,
                "passed": self.passed, "note": self.note}


@dataclass
class Report:
    scenario: dict
    checks: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def overall_pass(self):
        return all(c.passed for c in self.checks)

    def hash_section(self):
        payload = {"scenario": self.scenario,
                   "checks": [c.as_dict() for c in self.checks],
                   "skipped": self.skipped}
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def as_dict(self):
        section = self.hash_section()
        return {"schema": SCHEMA_VERSION,
                "scenario": self.scenario,
                "checks": [c.as_dict() for c in self.checks],
                "skipped": self.skipped,
                "overall_pass": self.overall_pass,
                "hash": hashlib.sha256(section.encode()).hexdigest(),
                "environment": self.environment,
                "timings": self.timings}

    def to_json(self, indent=2):
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


def _environment():
    return {"python": platform.python_version(),
            "numpy": np.__version__,
            "machine": platform.machine()}


# ---------------------------------------------------------------------------
# scenario handling
# ---------------------------------------------------------------------------

_DEFAULTS = {"seed": 0, "tol_scale": 1.0, "samples": 6, "count": 3}


def load_scenario(source) -> dict:
    """Parse and validate a scenario (path, JSON string, or dict)."""
    if isinstance(source, dict):
        raw = dict(source)
    else:
        text = source
        if not str(source).lstrip().startswith("{"):
            try:
                with open(source) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read scenario file: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    if raw.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"field 'schema': expected {SCHEMA_VERSION}, "
                          f"got {raw.get('schema')!r}")
    if "item" not in raw:
        raise ConfigError("field 'item': missing")
    suite = raw.get("suite", "all")
    if suite != "all" and suite not in SUITES:
        raise ConfigError(f"field 'suite': unknown suite {suite!r}")
    for key, default in _DEFAULTS.items():
        raw.setdefault(key, default)
    if not (isinstance(raw["seed"], int) and raw["seed"] >= 0):
        raise ConfigError("field 'seed': must be a nonnegative integer")
    if not (isinstance(raw["tol_scale"], (int, float)) and raw["tol_scale"] > 0):
        raise ConfigError("field 'tol_scale': must be positive")
    grid = raw.get("grid")
    if grid is not None:
        if (not isinstance(grid, list) or
                not all(isinstance(s, int) and s >= 3 for s in grid)):
            raise ConfigError("field 'grid': must be a list of integers >= 3")
    raw.setdefault("suite", "all")
    return raw


def _resolve_item(scenario):
    cat = default_catalog()
    name = scenario["item"]
    if name not in cat:
        raise ConfigError(f"field 'item': unknown catalog item {name!r} "
                          f"(have: {', '.join(sorted(cat))})")
    item = cat[name]
    grid = scenario.get("grid")
    if grid is not None:
        from dataclasses import replace
        base = item.smooth_map.domain
        if len(grid) != base.dim:
            raise ConfigError(f"field 'grid': needs {base.dim} entries")
        dom = ChartDomain(base.dim, base.box, tuple(grid))
        fmap = SmoothMap(dom, item.smooth_map.codomain_dim,
                         item.smooth_map.evaluator, item.smooth_map.name)
        conf = item.conformal
        if conf is not None:
            from .conformal import ConformalStructure
            omega = SmoothMap(dom, 1, conf.omega.evaluator, conf.omega.name)
            chart = None
            if conf.flat_chart is not None:
                chart = SmoothMap(dom, conf.flat_chart.codomain_dim,
                                  conf.flat_chart.evaluator,
                                  conf.flat_chart.name)
            conf = ConformalStructure(omega, chart)
        item = replace(item, smooth_map=fmap, conformal=conf)
    return item


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _sample(item, scenario):
    rng = np.random.default_rng(scenario["seed"])
    return item.smooth_map.domain.sample_points(scenario["samples"], rng)


def suite_extrinsic(item, scenario):
    ts = scenario["tol_scale"]
    pts = _sample(item, scenario)
    checks, skipped = [], []
    rperp = ricci = 0.0
    for pt in pts:
        nb = normal_connection_and_curvature(item.smooth_map, item.ambient, pt)
        rperp = max(rperp, float(np.max(np.abs(nb.r_perp_frame))))
        ricci = max(ricci, nb.disagreement)
    checks.append(CheckResult("normal curvature vanishes",
                              "extrinsic/flat-normal-bundle", rperp,
                              1e-8 * ts).evaluate())
    checks.append(CheckResult("normal curvature matches shape-operator commutators",
                              "extrinsic/ricci-agreement", ricci,
                              1e-8 * ts).evaluate())
    if item.conformal is not None:
        resid = item.conformal.metric_residual(item.smooth_map, item.ambient, pts)
        checks.append(CheckResult("induced metric is e^(2w) x flat chart metric",
                                  "extrinsic/conformal-metric", resid,
                                  1e-8 * ts).evaluate())
    else:
        skipped.append({"anchor": "extrinsic/conformal-metric",
                        "reason": "no conformal structure attached"})
    return checks, skipped


def suite_principal(item, scenario):
    ts = scenario["tol_scale"]
    pts = _sample(item, scenario)
    checks, skipped = [], []
    census = properness_and_census(item.smooth_map, item.ambient, pts,
                                   seed=scenario["seed"])
    expected_k = item.expected.get("k")
    if expected_k is not None:
        checks.append(CheckResult("number of principal normals",
                                  "principal/properness-k",
                                  float(abs(census.k - expected_k)),
                                  0.0).evaluate())
    expected_mult = item.expected.get("multiplicities")
    if expected_mult is not None:
        match = tuple(sorted(census.multiplicities)) == tuple(sorted(expected_mult))
        checks.append(CheckResult("principal multiplicities as expected",
                                  "principal/multiplicities",
                                  0.0 if match else 1.0, 0.0).evaluate())
    if item.expected.get("conformally_flat", True):
        checks.append(CheckResult("at most one multiplicity exceeds one",
                                  "principal/single-high-multiplicity",
                                  0.0 if census.single_high_multiplicity else 1.0,
                                  0.0).evaluate())
    else:
        skipped.append({"anchor": "principal/single-high-multiplicity",
                        "reason": "structural property of conformally flat "
                                  "immersions; item is a negative control"})
    checks.append(CheckResult("second fundamental form reconstructed from "
                              "principal normals",
                              "principal/reconstruction",
                              census.reconstruction_residual,
                              1e-7 * ts).evaluate())
    try:
        rep = holonomicity_check(item.smooth_map, item.ambient, pts,
                                 seed=scenario["seed"])
        checks.append(CheckResult("coordinate net follows curvature directions",
                                  "principal/holonomic-offdiag",
                                  max(rep.net_offdiag, rep.alpha_offdiag),
                                  1e-7 * ts).evaluate())
    except NotApplicable as exc:
        skipped.append({"anchor": "principal/holonomic-offdiag",
                        "reason": str(exc)})
    if census.k >= 3:
        dec = principal_decomposition(
            fundamental_forms(item.smooth_map, item.ambient, pts[0]),
            seed=scenario["seed"])
        checks.append(CheckResult("principal normals pairwise separated",
                                  "principal/separation",
                                  separation_check(dec), 0.0,
                                  kind="min").evaluate())
    else:
        skipped.append({"anchor": "principal/separation",
                        "reason": "needs at least three principal normals"})
    return checks, skipped


def suite_conformal(item, scenario):
    ts = scenario["tol_scale"]
    pts = _sample(item, scenario)
    checks, skipped = [], []
    provider = immersion_curvature_provider(item.smooth_map, item.ambient)
    resid = conformal_flatness_test(provider, pts, trials=20,
                                    seed=scenario["seed"])
    expect_flat = item.expected.get("conformally_flat", True)
    if expect_flat:
        checks.append(CheckResult("curvature satisfies the conformal flatness "
                                  "identity",
                                  "conformal/flatness", resid,
                                  1e-6 * ts).evaluate())
    else:
        chk = CheckResult("curvature violates the conformal flatness identity",
                          "conformal/flatness-negative-control", resid,
                          0.05, kind="min").evaluate()
        if chk.passed:
            chk.note = "negative control confirmed"
        checks.append(chk)
    if item.conformal is not None:
        try:
            q = lemma_q_suite(item.smooth_map, item.ambient, item.conformal,
                              pts, seed=scenario["seed"])
            checks.append(CheckResult("Q vanishes between eigendistributions",
                                      "conformal/q-offblock",
                                      q.offblock_residual, 1e-7 * ts).evaluate())
            if q.high_mult_residual is not None:
                checks.append(CheckResult(
                    "Q on the high-multiplicity distribution",
                    "conformal/q-high-multiplicity",
                    q.high_mult_residual, 1e-7 * ts).evaluate())
            checks.append(CheckResult("Q metric duality",
                                      "conformal/q-duality",
                                      q.duality_residual, 1e-7 * ts).evaluate())
        except NotApplicable as exc:
            skipped.append({"anchor": "conformal/q-suite", "reason": str(exc)})
    else:
        skipped.append({"anchor": "conformal/q-suite",
                        "reason": "no conformal structure attached"})
    return checks, skipped


def suite_lightcone(item, scenario):
    ts = scenario["tol_scale"]
    checks, skipped = [], []
    if item.conformal is None or item.conformal.flat_chart is None:
        skipped.append({"anchor": "lightcone/suite",
                        "reason": "needs a conformal structure with flat chart"})
        return checks, skipped
    pts = _sample(item, scenario)
    model = build_cone_model(item.smooth_map.codomain_dim)
    rng = np.random.default_rng(scenario["seed"] + 1)
    psi_pts = rng.uniform(-0.7, 0.7, size=(3, model.N))
    checks.append(CheckResult("model surface is totally geodesic in the cone",
                              "lightcone/model-second-fundamental",
                              psi_second_fundamental_residual(model, psi_pts),
                              1e-9 * ts).evaluate())
    lift = flat_lift(item.smooth_map, item.conformal, model, check_points=pts)
    cone = max(abs(float(np.sum(model.ambient.signature
                                * lift.F.value(pt) ** 2))) for pt in pts)
    checks.append(CheckResult("lift lies on the cone",
                              "lightcone/cone-membership", cone,
                              1e-8 * ts).evaluate())
    proj = project_from_cone(lift.F, model, points=pts)
    rt = 0.0
    for pt in pts:
        x = item.smooth_map.value(pt)
        rt = max(rt, float(np.max(np.abs(proj.f.value(pt) - x))))
    checks.append(CheckResult("projection recovers the original immersion",
                              "lightcone/roundtrip", rt, 1e-9 * ts).evaluate())
    lemma = max(lift_second_fundamental_form(lift, pt)[1] for pt in pts)
    checks.append(CheckResult("closed form of the lifted second fundamental form",
                              "lightcone/lift-second-fundamental", lemma,
                              1e-7 * ts).evaluate())
    rep = lift_correspondence_check(item.smooth_map, item.conformal, model,
                                    pts, seed=scenario["seed"])
    if rep.applicable:
        checks.append(CheckResult("lift stays holonomic in the same chart",
                                  "lightcone/lift-holonomic",
                                  rep.offdiag_F, 1e-7 * ts).evaluate())
        checks.append(CheckResult("principal normal count preserved by the lift",
                                  "lightcone/lift-k-match",
                                  float(abs(rep.k_F - rep.k_f)), 0.0).evaluate())
    return checks, skipped


def suite_ribaucour(item, scenario):
    from . import ribaucour as rb
    ts = scenario["tol_scale"]
    checks, skipped = [], []
    if item.conformal is None or item.conformal.flat_chart is None:
        skipped.append({"anchor": "ribaucour/suite",
                        "reason": "needs a conformal structure with flat chart"})
        return checks, skipped
    shape = item.smooth_map.domain.grid_shape
    if shape is None or min(shape) < 5:
        skipped.append({"anchor": "ribaucour/suite",
                        "reason": "centered differences with interior "
                                  "equations need >= 5 points per axis"})
        return checks, skipped
    rng = np.random.default_rng(scenario["seed"])
    model = build_cone_model(item.smooth_map.codomain_dim)
    lift = flat_lift(item.smooth_map, item.conformal, model)
    grid = rb.build_lift_grid(lift)
    h2 = float(np.max(grid.spacings)) ** 2
    checks.append(CheckResult("parallel frame transport converged",
                              "ribaucour/frame-transport",
                              grid.parallel_residual, 0.05 * ts).evaluate())
    fam = rb.analytic_family(grid)
    checks.append(CheckResult("analytic family satisfies the condition",
                              "ribaucour/analytic-family",
                              max(d.condition_residual for d in fam),
                              0.5 * h2 * ts).evaluate())
    ns = rb.solve_condition_nullspace(grid)
    checks.append(CheckResult("null space holds at least N+3 directions",
                              "ribaucour/nullspace-dimension",
                              float(ns.dimension), float(model.N + 3),
                              kind="min").evaluate())
    checks.append(CheckResult("analytic family captured by the null space",
                              "ribaucour/analytic-projection",
                              float(np.min(ns.analytic_projections)),
                              0.999, kind="min").evaluate())

    z = rng.standard_normal(grid.A)
    z /= np.linalg.norm(z)
    while abs(float(np.sum(grid.sig * z * z))) < 0.3:
        z = rng.standard_normal(grid.A)
        z /= np.linalg.norm(z)
    data = rb.constant_vector_data(grid, z, name="reflection")
    result = rb.transform(grid, data)
    checks.append(CheckResult("reflection transform stays on the cone",
                              "ribaucour/reflection-cone-defect",
                              result.cone_defect, 1e-10 * ts).evaluate())
    mpres = 0.0
    pts = _sample(item, scenario)
    for pt in pts:
        jF = evaluate_jet(lift.F, pt, 1)
        jT = evaluate_jet(result.F_tilde_map, pt, 1)
        sig = grid.sig
        gF = np.einsum("iA,A,jA->ij", jF.d1, sig, jF.d1)
        gT = np.einsum("iA,A,jA->ij", jT.d1, sig, jT.d1)
        mpres = max(mpres, float(np.max(np.abs(gF - gT))) /
                    float(np.max(np.abs(gF))))
    checks.append(CheckResult("reflection preserves the induced metric",
                              "ribaucour/reflection-metric",
                              mpres, 1e-9 * ts).evaluate())
    proj = project_from_cone(result.F_tilde_map, model, points=pts)
    provider = immersion_curvature_provider(proj.f,
                                            amb_mod.euclidean(model.N))
    cf = conformal_flatness_test(provider, pts, trials=20,
                                 seed=scenario["seed"])
    checks.append(CheckResult("projected reflection is conformally flat",
                              "ribaucour/reflection-projection-flatness",
                              cf, 1e-6 * ts).evaluate())
    shifted = rb.shift_data(grid, data, 1.0)
    res2 = rb.transform(grid, shifted)
    rep = rb.cone_preservation_check(grid, shifted, res2)
    checks.append(CheckResult("cone defect matches its algebraic prediction",
                              "ribaucour/cone-identity",
                              rep.prediction_mismatch, 1e-8 * ts).evaluate())
    t = 2.5
    scaled = rb.RibaucourData(t * data.phi, t * data.b, t * data.c,
                              data.condition_residual, name="scaled")
    res3 = rb.transform(grid, scaled)
    inv = float(np.max(np.abs(res3.F_tilde - result.F_tilde)))
    checks.append(CheckResult("transform invariant under data scaling",
                              "ribaucour/scaling-invariance",
                              inv, 1e-12 * ts).evaluate())
    return checks, skipped


_SUITE_FUNCS = {"extrinsic": suite_extrinsic, "principal": suite_principal,
                "conformal": suite_conformal, "lightcone": suite_lightcone,
                "ribaucour": suite_ribaucour}


def run_scenario(source) -> Report:
    scenario = load_scenario(source)
    item = _resolve_item(scenario)
    hashable = {k: scenario[k] for k in
                ("schema", "item", "suite", "seed", "tol_scale", "samples")}
    if scenario.get("grid") is not None:
        hashable["grid"] = scenario["grid"]
    report = Report(hashable, environment=_environment())
    names = SUITES if scenario["suite"] == "all" else (scenario["suite"],)
    for name in names:
        t0 = time.perf_counter()
        try:
            checks, skipped = _SUITE_FUNCS[name](item, scenario)
        except NotApplicable as exc:
            checks, skipped = [], [{"anchor": f"{name}/suite",
                                    "reason": str(exc)}]
        report.checks.extend(checks)
        report.skipped.extend(skipped)
        report.timings[name] = round(time.perf_counter() - t0, 3)
    return report


# ---------------------------------------------------------------------------
# family serialization
# ---------------------------------------------------------------------------

def write_grid_samples(path, samples, grid_shape, box, n, n_amb):
    """Header line of JSON metadata, then the row-major float64
    little-endian sample block."""
    header = {"n": int(n), "N_amb": int(n_amb),
              "grid_shape": [int(s) for s in grid_shape],
              "box": [[float(lo), float(hi)] for lo, hi in box]}
    data = np.ascontiguousarray(samples, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(data.tobytes())


def read_grid_samples(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        body = np.frombuffer(fh.read(), dtype="<f8")
    shape = tuple(header["grid_shape"]) + (header["N_amb"],)
    return header, body.reshape(shape)


def run_pipeline(source, out_dir=None) -> Report:
    """Family construction run: lift, null space, transforms, projected
    members; member grid samples written to out_dir when given."""
    import os

    from . import ribaucour as rb
    scenario = load_scenario(source)
    item = _resolve_item(scenario)
    if item.conformal is None or item.conformal.flat_chart is None:
        raise ConfigError(f"field 'item': {scenario['item']!r} has no "
                          "conformal structure with a flat chart to lift")
    shape = item.smooth_map.domain.grid_shape
    if shape is None or min(shape) < 5:
        raise ConfigError("field 'grid': pipeline needs >= 5 points per axis "
                          "(centered differences with interior equations)")
    hashable = {k: scenario[k] for k in
                ("schema", "item", "seed", "tol_scale", "count")}
    report = Report(hashable, environment=_environment())
    t0 = time.perf_counter()
    fam = rb.conformally_flat_family(item.smooth_map, item.conformal,
                                     item.ambient, count=scenario["count"],
                                     seed=scenario["seed"])
    report.timings["pipeline"] = round(time.perf_counter() - t0, 3)
    N = fam.grid.lift.model.N
    report.checks.append(CheckResult("null space holds at least N+3 directions",
                                     "pipeline/nullspace-dimension",
                                     float(fam.nullspace.dimension),
                                     float(N + 3), kind="min").evaluate())
    for rec in fam.members:
        anchor = f"pipeline/member-{rec.name}"
        if rec.error is not None:
            report.skipped.append({"anchor": anchor, "reason": rec.error})
            continue
        if not rec.retained:
            report.skipped.append({"anchor": anchor,
                                   "reason": "flatness filter rejected"})
            continue
        report.checks.append(CheckResult(
            f"member {rec.name}: projection conformally flat",
            anchor + "/flatness", rec.cf_residual,
            1e-6 * scenario["tol_scale"]).evaluate())
        report.checks.append(CheckResult(
            f"member {rec.name}: holonomic in the original chart",
            anchor + "/holonomic", rec.offdiag_residual,
            1e-6 * scenario["tol_scale"]).evaluate())
        if out_dir is not None and rec.samples is not None:
            os.makedirs(out_dir, exist_ok=True)
            write_grid_samples(
                os.path.join(out_dir, f"{rec.name}.grid"), rec.samples,
                fam.grid.shape, item.smooth_map.domain.box,
                fam.grid.n, N)
    return report
