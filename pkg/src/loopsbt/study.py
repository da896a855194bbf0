"""Radius sweeps comparing the two solvers, plus the invariant suite.

For each tube radius the centerline solve and the surface solve are run
on the same geometry and the velocity gap is recorded together with the
bound envelope sqrt(eps) |log eps|^(3/2) (|log eps|^(1/2) ||f||_C1 + |F| + |T|).
The sweep emits a flat CSV; the rate report fits the observed decay
exponent and checks that the normalized gap does not outgrow the
envelope as the radius shrinks.
"""

import json

import numpy as np

from .errors import ConditioningError, CurveError, GeometryError
from .geometry import SlenderGeometry, build_curve, transform_curve
from .mobility import (
    equivariance_check,
    grand_mobility,
    rigid_motion_gram,
    solve_mobility,
)
from .reference import (
    build_surface_mesh,
    reference_self_convergence,
    solve_reference_mobility,
)
from .sbt import assemble_sbt_matrix
from .util import rotation_matrix

CSV_HEADER = (
    "epsilon,n_sbt,ns_ref,ntheta_ref,"
    "vs_x,vs_y,vs_z,ws_x,ws_y,ws_z,"
    "vr_x,vr_y,vr_z,wr_x,wr_y,wr_z,"
    "err_v,err_w,err_total,f_c1,envelope,cond_sbt,cond_ref,ref_err_est,flag"
)

_CONFIG_KEYS = (
    "curve",
    "epsilons",
    "n_sbt",
    "ref_ladder",
    "delta_factor",
    "force",
    "torque",
    "seed",
)
_CURVE_KEYS = ("type", "params")

REF_BUDGET_FACTOR = 0.2
C_EFF_SLACK = 1.25


class StudyConfig:
    """Validated sweep configuration (see the JSON schema in the README)."""

    def __init__(
        self,
        curve_type="circle",
        curve_params=None,
        epsilons=(0.04, 0.02, 0.01, 0.005),
        n_sbt=256,
        ref_ladder=((32, 8), (64, 16), (128, 16)),
        delta_factor=1.0,
        force=(0.0, 0.0, 1.0),
        torque=(0.0, 0.0, 0.0),
        seed=0,
    ):
        self.curve_type = str(curve_type)
        self.curve_params = dict(curve_params or {})
        self.epsilons = [float(e) for e in epsilons]
        if not self.epsilons:
            raise ValueError("epsilons must be non-empty")
        if any(b >= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ValueError("epsilons must be strictly decreasing: %r" % self.epsilons)
        if min(self.epsilons) <= 0.0:
            raise ValueError("epsilons must be positive")
        self.n_sbt = int(n_sbt)
        self.ref_ladder = [(int(a), int(b)) for a, b in ref_ladder]
        self.delta_factor = float(delta_factor)
        self.force = np.asarray(force, dtype=float).reshape(3)
        self.torque = np.asarray(torque, dtype=float).reshape(3)
        self.seed = int(seed)

    @classmethod
    def from_dict(cls, data):
        unknown = sorted(set(data) - set(_CONFIG_KEYS))
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(unknown))
        kwargs = {}
        if "curve" in data:
            curve = data["curve"]
            bad = sorted(set(curve) - set(_CURVE_KEYS))
            if bad:
                raise ValueError("unknown curve keys: %s" % ", ".join(bad))
            kwargs["curve_type"] = curve.get("type", "circle")
            kwargs["curve_params"] = curve.get("params", {})
        for key in ("epsilons", "n_sbt", "ref_ladder", "delta_factor", "force", "torque", "seed"):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {
            "curve": {"type": self.curve_type, "params": dict(self.curve_params)},
            "epsilons": list(self.epsilons),
            "n_sbt": self.n_sbt,
            "ref_ladder": [list(r) for r in self.ref_ladder],
            "delta_factor": self.delta_factor,
            "force": self.force.tolist(),
            "torque": self.torque.tolist(),
            "seed": self.seed,
        }

    def build_curve(self):
        return build_curve(self.curve_type, self.curve_params, n_grid=self.n_sbt)


class SweepRecord:
    """One radius worth of sweep output; mirrors the CSV columns."""

    FIELDS = CSV_HEADER.split(",")

    def __init__(self, **kw):
        for name in self.FIELDS:
            setattr(self, name, kw[name])

    @classmethod
    def failed(cls, epsilon, n_sbt, ns_ref, ntheta_ref):
        nanv = float("nan")
        values = {name: nanv for name in cls.FIELDS}
        values.update(
            epsilon=epsilon,
            n_sbt=n_sbt,
            ns_ref=ns_ref,
            ntheta_ref=ntheta_ref,
            flag="solve-failed",
        )
        return cls(**values)

    def astuple(self):
        return tuple(getattr(self, name) for name in self.FIELDS)

    def format_csv(self):
        parts = []
        for name in self.FIELDS:
            value = getattr(self, name)
            if name == "flag":
                parts.append(str(value))
            elif name in ("n_sbt", "ns_ref", "ntheta_ref"):
                parts.append("%d" % value)
            else:
                parts.append(format(float(value), ".17e"))
        return ",".join(parts)


def error_metric(kin_r, kin_s):
    """(|v_r - v_s|, |w_r - w_s|, sum) in Euclidean norms."""
    err_v = float(np.linalg.norm(kin_r.v - kin_s.v))
    err_w = float(np.linalg.norm(kin_r.omega - kin_s.omega))
    return err_v, err_w, err_v + err_w


def bound_envelope(epsilon, f_c1, force, torque):
    """sqrt(eps) |log eps|^{3/2} (|log eps|^{1/2} ||f||_C1 + |F| + |T|)."""
    le = abs(np.log(epsilon))
    loads = np.linalg.norm(force) + np.linalg.norm(torque)
    return float(np.sqrt(epsilon) * le**1.5 * (np.sqrt(le) * f_c1 + loads))


class RateReport:
    """Least-squares decay exponent and envelope-trend verdicts."""

    def __init__(self, slope, n_used, err_decreasing, c_eff, c_eff_ok, refused_reason=None):
        self.slope = slope
        self.n_used = n_used
        self.err_decreasing = err_decreasing
        self.c_eff = c_eff
        self.c_eff_ok = c_eff_ok
        self.refused_reason = refused_reason

    @property
    def fitted(self):
        return self.refused_reason is None


class SweepResult:
    def __init__(self, config, records, rate):
        self.config = config
        self.records = records
        self.rate = rate

    def to_csv(self):
        lines = [CSV_HEADER]
        lines.extend(record.format_csv() for record in self.records)
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        text = self.to_csv()
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return text


def read_sweep_csv(path_or_text, from_text=False):
    """Parse a sweep CSV back into SweepRecord objects."""
    if from_text:
        lines = path_or_text.strip().split("\n")
    else:
        with open(path_or_text) as fh:
            lines = fh.read().strip().split("\n")
    if lines[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header: %r" % lines[0])
    records = []
    for line in lines[1:]:
        parts = line.split(",")
        values = {}
        for name, part in zip(SweepRecord.FIELDS, parts):
            if name == "flag":
                values[name] = part
            elif name in ("n_sbt", "ns_ref", "ntheta_ref"):
                values[name] = int(part)
            else:
                values[name] = float(part)
        records.append(SweepRecord(**values))
    return records


def _sweep_one(config, curve, epsilon):
    ns_ref, ntheta_ref = config.ref_ladder[-1]
    geometry = SlenderGeometry(curve, epsilon)
    fdens, kin_s = solve_mobility(geometry, config.force, config.torque)
    report = reference_self_convergence(
        geometry, config.force, config.torque, config.ref_ladder, config.delta_factor
    )
    kin_r = report.finest
    err_v, err_w, err_total = error_metric(kin_r, kin_s)
    f_c1 = fdens.c1_norm()
    envelope = bound_envelope(epsilon, f_c1, config.force, config.torque)
    flag = "ok"
    if report.err_est > REF_BUDGET_FACTOR * err_total:
        flag = "reference-limited"
    return SweepRecord(
        epsilon=epsilon,
        n_sbt=config.n_sbt,
        ns_ref=ns_ref,
        ntheta_ref=ntheta_ref,
        vs_x=kin_s.v[0], vs_y=kin_s.v[1], vs_z=kin_s.v[2],
        ws_x=kin_s.omega[0], ws_y=kin_s.omega[1], ws_z=kin_s.omega[2],
        vr_x=kin_r.v[0], vr_y=kin_r.v[1], vr_z=kin_r.v[2],
        wr_x=kin_r.omega[0], wr_y=kin_r.omega[1], wr_z=kin_r.omega[2],
        err_v=err_v,
        err_w=err_w,
        err_total=err_total,
        f_c1=f_c1,
        envelope=envelope,
        cond_sbt=kin_s.condition,
        cond_ref=kin_r.condition,
        ref_err_est=report.err_est,
        flag=flag,
    )


def run_sweep(config):
    """Run the radius sweep; failures are recorded and the sweep continues."""
    curve = config.build_curve()
    records = []
    for epsilon in config.epsilons:
        ns_ref, ntheta_ref = config.ref_ladder[-1]
        try:
            records.append(_sweep_one(config, curve, epsilon))
        except (ConditioningError, GeometryError, CurveError, ValueError):
            records.append(SweepRecord.failed(epsilon, config.n_sbt, ns_ref, ntheta_ref))
    records.sort(key=lambda r: -r.epsilon)

    usable = [r for r in records if r.flag == "ok"]
    if len(usable) < 3:
        rate = RateReport(
            slope=None,
            n_used=len(usable),
            err_decreasing=None,
            c_eff=[],
            c_eff_ok=None,
            refused_reason="rate fit refused: %d usable records (need >= 3)" % len(usable),
        )
        return SweepResult(config, records, rate)

    eps = np.array([r.epsilon for r in usable])
    err = np.array([r.err_total for r in usable])
    slope = float(np.polyfit(np.log(eps), np.log(err), 1)[0])
    err_decreasing = bool(np.all(np.diff(err) < 0.0))
    c_eff = [r.err_total / r.envelope for r in usable]
    c_eff_ok = all(b <= C_EFF_SLACK * a for a, b in zip(c_eff, c_eff[1:]))
    rate = RateReport(slope, len(usable), err_decreasing, c_eff, c_eff_ok)
    return SweepResult(config, records, rate)


class ValidationReport:
    """Named invariant checks with measured values, rendered as JSON."""

    def __init__(self):
        self.checks = {}

    def add(self, name, passed, value, threshold=None, note=None):
        entry = {"passed": bool(passed), "value": value}
        if threshold is not None:
            entry["threshold"] = threshold
        if note:
            entry["note"] = note
        self.checks[name] = entry

    @property
    def all_passed(self):
        return all(entry["passed"] for entry in self.checks.values())

    def to_json(self):
        return json.dumps(self.checks, sort_keys=True, indent=2) + "\n"

    def summary_lines(self):
        lines = []
        for name in sorted(self.checks):
            entry = self.checks[name]
            status = "PASS" if entry["passed"] else "FAIL"
            lines.append("%-4s %s (value=%s)" % (status, name, entry["value"]))
        return lines


def run_validate(config):
    """Execute every module's invariant suite at the configured sizes."""
    rng = np.random.default_rng(config.seed)
    report = ValidationReport()
    curve = config.build_curve()

    # curve invariants
    report.add(
        "curve.arclength_residual",
        curve.arclength_residual() <= 1e-8,
        curve.arclength_residual(),
        1e-8,
    )
    gap = float(np.linalg.norm(curve.point(np.array([0.0])) - curve.point(np.array([1.0]))))
    report.add("curve.periodicity", gap <= 1e-12, gap, 1e-12)

    geometry = SlenderGeometry(curve, min(config.epsilons))
    consts = geometry.constants
    report.add("curve.c_gamma_positive", consts.c_gamma > 0.0, consts.c_gamma)
    report.add(
        "geometry.r_max_curvature_bound",
        consts.r_max <= 1.0 / (2.0 * consts.kappa_max) + 1e-15,
        consts.r_max,
    )
    for epsilon in config.epsilons:
        report.add(
            "geometry.admissible_eps=%g" % epsilon,
            epsilon < consts.r_max / 4.0,
            epsilon,
            consts.r_max / 4.0,
        )

    # frame invariants
    frame = geometry.frame
    triad = np.stack([frame.e_t, frame.e_n1, frame.e_n2], axis=1)
    gram = np.einsum("nij,nkj->nik", triad, triad)
    ortho = np.abs(gram - np.eye(3)).max()
    report.add("frame.orthonormality", ortho <= 1e-10, float(ortho), 1e-10)
    resid = frame.ode_residual()
    report.add("frame.ode_residual", resid <= 1e-6, float(resid), 1e-6)
    report.add("frame.twist_bound", abs(frame.kappa3) <= np.pi, frame.kappa3, np.pi)
    kap = curve.curvature(curve.s_nodes)
    kdefect = np.abs(frame.kappa1**2 + frame.kappa2**2 - kap**2).max()
    report.add("frame.curvature_split", kdefect <= 1e-8, float(kdefect), 1e-8)

    # slender-body matrix invariants at the largest radius
    geom_big = SlenderGeometry(
        curve, max(config.epsilons), frame=frame, constants=consts
    )
    try:
        sbt = assemble_sbt_matrix(geom_big)
        report.add("sbt.symmetry", sbt.symmetry_defect() <= 1e-12, sbt.symmetry_defect(), 1e-12)

        load_f = rng.standard_normal(3)
        load_t = rng.standard_normal(3)
        fdens, kin = solve_mobility(geom_big, load_f, load_t, sbt=sbt)
        h = 1.0 / fdens.n
        x = curve.nodes
        rec_f = np.linalg.norm(h * fdens.values.sum(axis=0) - load_f)
        rec_t = np.linalg.norm(h * np.cross(x, fdens.values).sum(axis=0) - load_t)
        scale = np.linalg.norm(load_f) + np.linalg.norm(load_t)
        report.add("mobility.constraint_recovery", max(rec_f, rec_t) <= 1e-10 * scale,
                   float(max(rec_f, rec_t) / scale), 1e-10)
        resid_rigid = np.linalg.norm(
            sbt.apply(fdens.values) - kin.v[None, :] - np.cross(kin.omega, x), axis=1
        ).max()
        fscale = np.linalg.norm(fdens.values, axis=1).max()
        report.add("mobility.rigidity_residual", resid_rigid <= 1e-10 * max(fscale, 1.0),
                   float(resid_rigid / max(fscale, 1.0)), 1e-10)

        gm = grand_mobility(geom_big, sbt=sbt)
        report.add("mobility.grand_symmetry", gm.symmetry_defect <= 1e-8,
                   float(gm.symmetry_defect), 1e-8)
        report.add("mobility.grand_spd", gm.is_spd, float(gm.eigenvalues.min()))

        rot = rotation_matrix(rng.standard_normal(3), rng.uniform(0.0, np.pi))
        dev_rot = equivariance_check(geom_big, load_f, load_t, rotation=rot)
        report.add("mobility.rotation_equivariance", dev_rot <= 1e-8 * scale,
                   float(dev_rot / scale), 1e-8)
        shift = rng.standard_normal(3) * 0.3
        dev_tr = equivariance_check(geom_big, load_f, load_t, translation=shift)
        report.add("mobility.translation_equivariance", dev_tr <= 1e-8 * scale,
                   float(dev_tr / scale), 1e-8)
    except ConditioningError as exc:
        report.add("sbt.solvable", False, exc.estimate,
                   note="saddle solve rejected: %s" % exc)

    # rigid-motion Gram
    gramm = rigid_motion_gram(curve)
    report.add("gram.lambda_min_positive", gramm.lambda_min > 0.0, gramm.lambda_min)
    circle = build_curve("circle", n_grid=min(config.n_sbt, 256))
    gcirc = rigid_motion_gram(circle)
    closed = np.zeros((6, 6))
    closed[:3, :3] = np.eye(3)
    closed[3:, 3:] = np.diag(
        [1.0 / (8 * np.pi**2), 1.0 / (8 * np.pi**2), 1.0 / (4 * np.pi**2)]
    )
    gdev = np.abs(gcirc.matrix - closed).max()
    report.add("gram.circle_closed_form", gdev <= 1e-10, float(gdev), 1e-10)

    # surface mesh and robustness of the reference regularization
    ns0, nt0 = config.ref_ladder[0]
    mesh = build_surface_mesh(geom_big, ns0, nt0)
    area_dev = abs(mesh.area() - 2.0 * np.pi * geom_big.epsilon) / (
        2.0 * np.pi * geom_big.epsilon
    )
    report.add("mesh.weight_sum", area_dev <= 1e-6, float(area_dev), 1e-6)
    ndev = np.abs(np.linalg.norm(mesh.normals, axis=1) - 1.0).max()
    report.add("mesh.unit_normals", ndev <= 1e-10, float(ndev), 1e-10)

    try:
        _, kin1 = solve_reference_mobility(mesh, config.force, config.torque, 1.0)
        _, kin2 = solve_reference_mobility(mesh, config.force, config.torque, 2.0)
        rel = (np.linalg.norm(kin1.v - kin2.v) + np.linalg.norm(kin1.omega - kin2.omega)) / max(
            np.linalg.norm(kin1.v) + np.linalg.norm(kin1.omega), 1e-300
        )
        report.add("reference.delta_robustness", rel <= 0.05, float(rel), 0.05)
    except ConditioningError as exc:
        report.add("reference.delta_robustness", False, exc.estimate,
                   note="reference solve rejected: %s" % exc)

    return report
