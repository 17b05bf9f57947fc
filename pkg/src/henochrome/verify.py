"""
Property suites that check the henochromatic construction end to end.

Each suite returns a :class:`VerificationReport` whose checks record the
measured value next to the tolerance it was judged against.  Reports contain
no wall-clock data so that two runs with the same configuration serialize to
identical bytes; timings are kept on the side in ``report.timings``.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import exact, gauge, paraxial
from .grid import SPECTRAL, ComplexVectorField, TransverseGrid, inverse_transform, tail_mass
from .paraxial import C, Carrier
from .slices import fwhm

SUITE_NAMES = (
    "unitarity",
    "rotation",
    "gauge",
    "consistency",
    "completeness",
    "dispersion",
    "paraxial-accuracy",
    "negative-controls",
)

DEFAULT_TOLERANCES = {
    "unitarity": 1e-10,
    "omega_identity": 1e-12,
    "isometry": 1e-12,
    "gauge": 1e-12,
    "perpendicular": 1e-12,
    "fzcomp": 1e-10,
    "fzcomp_kappa_floor": 1e-6,
    "lift_routes": 1e-12,
    "linearity": 1e-12,
    "hand_value": 1e-15,
    "consistency": 1e-14,
    "mc_constraint": 1e-12,
    "divergence": 1e-8,
    "transversality": 1e-12,
    "completeness": 1e-4,
    "completeness_ratio": 4.0,
    "rho_independence": 1e-10,
    "dispersion": 1e-12,
    "wave_residual": 1e-6,
    "wave_order": 3.5,
    "orthonormality": 1e-8,
    "z_invariance": 1e-9,
    "norm_invariance": 1e-10,
    "residual_ratio": 10.0,
    "beam_spread": 0.01,
    "control_omega": 1e-3,
}


class UnknownSuiteError(ValueError):
    pass


@dataclass
class VerifyConfig:
    seed: int = 0
    k: float = 1.0
    w0: float = 20.0
    grid_n: int = 256
    grid_L: float = 300.0
    pairs: int = 20
    max_order: int = 4
    completeness_n: int = 128
    completeness_L: float = 200.0
    completeness_nkz: int = 192
    completeness_k_points: int = 64
    completeness_points: int = 200
    accuracy_kw0: tuple = (10.0, 20.0, 40.0, 80.0)
    tolerances: dict = field(default_factory=dict)

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def grid(self) -> TransverseGrid:
        return TransverseGrid(self.grid_n, self.grid_L)

    def carrier(self) -> Carrier:
        return Carrier(self.k)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["accuracy_kw0"] = list(self.accuracy_kw0)
        d["tolerances"] = {**DEFAULT_TOLERANCES, **self.tolerances}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VerifyConfig":
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {key: v for key, v in d.items() if key in known}
        if "accuracy_kw0" in kwargs:
            kwargs["accuracy_kw0"] = tuple(kwargs["accuracy_kw0"])
        unknown = set(kwargs.get("tolerances", {})) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**kwargs)


@dataclass
class Check:
    claim: str
    anchor: str
    value: float
    tolerance: float
    relation: str
    passed: bool
    control: bool = False


@dataclass
class VerificationReport:
    suite: str
    environment: dict
    checks: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    error: str | None = None
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "error": self.error,
            "environment": self.environment,
            "checks": [asdict(c) for c in self.checks],
            "series": self.series,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


class _Recorder:
    def __init__(self, report: VerificationReport):
        self.report = report
        self._t = time.perf_counter()

    def _stamp(self, claim):
        now = time.perf_counter()
        self.report.timings[claim] = now - self._t
        self._t = now

    def at_most(self, claim, anchor, value, tol):
        value = float(value)
        self.report.checks.append(Check(claim, anchor, value, tol, "<=", bool(value <= tol)))
        self._stamp(claim)

    def at_least(self, claim, anchor, value, tol):
        value = float(value)
        self.report.checks.append(Check(claim, anchor, value, tol, ">=", bool(value >= tol)))
        self._stamp(claim)

    def control(self, claim, anchor, value, tol):
        """A wrong-physics check that must exceed ``tol`` to register its failure."""
        value = float(value)
        self.report.checks.append(
            Check(claim, anchor, value, tol, ">", bool(value > tol), control=True))
        self._stamp(claim)


# -- shared fixtures ---------------------------------------------------------

def mode_set(cfg: VerifyConfig):
    """``cfg.pairs`` seeded pairs of random HG superpositions (not normalized)."""
    rng = np.random.default_rng(cfg.seed)
    g, car = cfg.grid(), cfg.carrier()
    paraxial.check_resolution(g, cfg.w0, cfg.max_order)
    return [(paraxial.random_hg_superposition(rng, cfg.w0, car, g, cfg.max_order, False),
             paraxial.random_hg_superposition(rng, cfg.w0, car, g, cfg.max_order, False))
            for _ in range(cfg.pairs)]


def _q(grid):
    qx, qy = grid.spectral_mesh()
    return np.stack([qx, qy], axis=-1)


def _pointwise_rel(a, b, ref):
    ref = np.abs(ref)
    mask = ref > 0
    return float(np.max(np.abs(a - b)[mask] / ref[mask])) if mask.any() else 0.0


def fd_second(f, h):
    """Fourth-order central second derivative from samples at -2h..2h."""
    fm2, fm1, f0, fp1, fp2 = f
    return (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)


def fd_first(f, h):
    fm2, fm1, _, fp1, fp2 = f
    return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)


def _stencil(point, h):
    point = np.asarray(point, dtype=float)
    rows = []
    for axis in range(4):
        for j in (-2, -1, 0, 1, 2):
            p = point.copy()
            p[axis] += j * h
            rows.append(p)
    return np.array(rows)


def wave_operator_residual(evaluate, point, h, c: float = C) -> float:
    """``|d2A/dt2 / c^2 - lap A| / |d2A/dt2 / c^2|`` with fourth-order stencils."""
    vals = evaluate(_stencil(point, h)).reshape(4, 5, -1)
    d2 = [fd_second(vals[a], h) for a in range(4)]
    box = d2[3] / c**2 - d2[0] - d2[1] - d2[2]
    return float(np.linalg.norm(box) / np.linalg.norm(d2[3] / c**2))


def divergence_residual(evaluate, point, h, k0: float) -> float:
    """``|div A| / (k0 |A|)`` with fourth-order first differences."""
    vals = evaluate(_stencil(point, h)).reshape(4, 5, -1)
    div = sum(fd_first(vals[a][:, a], h) for a in range(3))
    return float(abs(div) / (k0 * np.linalg.norm(vals[0][2])))


def _random_points(rng, n, s_scale, z_scale, t_scale):
    return np.column_stack([
        rng.uniform(-s_scale, s_scale, n),
        rng.uniform(-s_scale, s_scale, n),
        rng.uniform(-z_scale, z_scale, n),
        rng.uniform(-t_scale, t_scale, n),
    ])


# -- suites ------------------------------------------------------------------

def suite_unitarity(cfg: VerifyConfig, rec: _Recorder):
    tol = cfg.tol("unitarity")
    pairs = mode_set(cfg)
    worst = 0.0
    for a, b in pairs:
        ha, hb = gauge.heno_lift(a), gauge.heno_lift(b)
        rel = exact.relativistic_inner_product_reduced(ha, hb)
        par = paraxial.envelope_inner_product(a, b)
        worst = max(worst, abs(rel - C * cfg.k * par) / (a.norm() * b.norm()))
    rec.at_most(f"reduced relativistic product equals ck <a,b> over {len(pairs)} pairs",
                "<A_a|A_b>_reduced = Omega(k) <Xi_a|Xi_b>, Omega = ck", worst, tol)
    diag = max(abs(exact.relativistic_inner_product_reduced(gauge.heno_lift(a), gauge.heno_lift(a))
                   / (C * cfg.k * a.norm() ** 2) - 1) for a, _ in pairs)
    rec.at_most("norm ratio reduced/(ck <a,a>) - 1", "Omega(k) = ck", diag, tol)
    q = _q(cfg.grid())
    ratio = gauge.omega(q, cfg.k) / np.abs(gauge.dkappa_dk(q, cfg.k))
    rec.at_most("omega / |dkappa/dk| = ck at every lattice site (relative)",
                "omega/|dkappa/dk| = Omega(k)",
                np.max(np.abs(ratio / (C * cfg.k) - 1)), cfg.tol("omega_identity"))
    other = gauge.HenoAmplitude(Carrier(2 * cfg.k), gauge.heno_lift(pairs[0][1]).spectral3)
    rec.at_most("distinct carriers are orthogonal", "delta(k2 - k1)",
                abs(exact.relativistic_inner_product_reduced(gauge.heno_lift(pairs[0][0]), other)),
                0.0)


def suite_rotation(cfg: VerifyConfig, rec: _Recorder):
    modes = [m for pair in mode_set(cfg) for m in pair]
    g = cfg.grid()
    q = _q(g)
    qn = np.hypot(q[..., 0], q[..., 1])
    kz = gauge.kappa(q, cfg.k)
    iso = perp = fz = routes = gres = 0.0
    for m in modes:
        F = m.spectral.data
        h = gauge.heno_lift(m)
        gres = max(gres, gauge.gauge_residual(h))
        Fp = h.spectral3.data
        nF = np.linalg.norm(F, axis=-1)
        iso = max(iso, _pointwise_rel(np.linalg.norm(Fp, axis=-1), nF, nF))
        # component along z x q_hat = (-qy, qx)/|q|
        ok = qn > 0
        ex = np.where(ok, -q[..., 1] / np.where(ok, qn, 1), 0)
        ey = np.where(ok, q[..., 0] / np.where(ok, qn, 1), 0)
        perp = max(perp, _pointwise_rel(ex * Fp[..., 0] + ey * Fp[..., 1],
                                        ex * F[..., 0] + ey * F[..., 1], nF))
        sel = ok & (np.abs(kz) > cfg.tol("fzcomp_kappa_floor") * cfg.k)
        fpar = (q[..., 0] * Fp[..., 0] + q[..., 1] * Fp[..., 1]) / np.where(ok, qn, 1)
        pred = -(qn / np.where(sel, kz, 1)) * fpar
        fz = max(fz, _pointwise_rel(np.where(sel, Fp[..., 2], 0), np.where(sel, pred, 0),
                                    np.where(sel, nF, 0)))
        alt = gauge.rotation_lift(F, q, kz)
        routes = max(routes, _pointwise_rel(alt, Fp, np.broadcast_to(nF[..., None], Fp.shape)))
    rec.at_most("pointwise isometry |F'| = |F|", "the lift is a rotation", iso, cfg.tol("isometry"))
    rec.at_most("gauge residual on the rotation mode set", "(q + kappa z) . F' = 0", gres, cfg.tol("gauge"))
    rec.at_most("component along z x q preserved", "F'_perp = F_perp", perp, cfg.tol("perpendicular"))
    rec.at_most("F'_z = -(|q|/kappa) F'_par where |kappa| > 1e-6 k",
                "F'_z = -(|q|/kappa) F'_par", fz, cfg.tol("fzcomp"))
    rec.at_most("closed form agrees with explicit rotation about z x q",
                "F' = F - 2 (q + 2k z)(q.F)/(|q|^2 + 4k^2)", routes, cfg.tol("lift_routes"))
    a, b = modes[0], modes[1]
    alpha, beta = 0.3 - 1.1j, 2.0 + 0.5j
    lhs = gauge.heno_lift(alpha * a + beta * b).spectral3.data
    rhs = alpha * gauge.heno_lift(a).spectral3.data + beta * gauge.heno_lift(b).spectral3.data
    rec.at_most("linearity of the lift", "mapping is linear",
                np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)), cfg.tol("linearity"))
    hand = gauge.lift_array(np.array([1.0, 0.0]), np.array([1.0, 0.0]), 1.0)
    rec.at_most("hand value k=1, q=(1,0), F=(1,0,0) -> (3/5, 0, -4/5)",
                "F' = F - 2 (q + 2k z)(q.F)/(|q|^2 + 4k^2)",
                np.max(np.abs(hand - np.array([0.6, 0.0, -0.8]))), cfg.tol("hand_value"))


def suite_gauge(cfg: VerifyConfig, rec: _Recorder):
    modes = [m for pair in mode_set(cfg) for m in pair]
    worst = max(gauge.gauge_residual(gauge.heno_lift(m)) for m in modes)
    rec.at_most("gauge residual of lifted amplitudes", "(q + kappa z) . F' = 0",
                worst, cfg.tol("gauge"))
    # monochromatic completion of the same modes
    mc = [exact.mc_complete(m, cfg.k) for m in modes[:4]]
    q = _q(cfg.grid())
    mcres = 0.0
    for f in mc:
        F = f.spectral3.data
        kz = f.kz()
        keep = kz > 0
        lhs = F[..., 2] * np.where(keep, kz, 0)
        rhs = -(q[..., 0] * F[..., 0] + q[..., 1] * F[..., 1])
        mcres = max(mcres, _pointwise_rel(np.where(keep, lhs, 0), np.where(keep, rhs, 0),
                                          np.where(keep, np.linalg.norm(F, axis=-1) * cfg.k, 0)))
    rec.at_most("monochromatic longitudinal constraint at kept sites",
                "F_z = -q.F / sqrt(k0^2 - |q|^2)", mcres, cfg.tol("mc_constraint"))
    rng = np.random.default_rng(cfg.seed + 1)
    lam = 2 * np.pi / cfg.k
    pts = _random_points(rng, 3, cfg.w0, 10 * lam, 10 * lam)
    div = max(divergence_residual(lambda p: exact.evaluate_mc_field(mc[0], p), p,
                                  lam / 400, cfg.k) for p in pts)
    rec.at_most("finite-difference div A of monochromatic field (h = lambda/400)",
                "k . A(k) = 0", div, cfg.tol("divergence"))
    hdiv = max(divergence_residual(lambda p: gauge.evaluate_heno_field(gauge.heno_lift(modes[0]), p),
                                   p, lam / 400, cfg.k) for p in pts)
    rec.at_most("finite-difference div A of henochromatic field (h = lambda/400)",
                "(q + kappa z) . F' = 0", hdiv, cfg.tol("divergence"))


def azimuthal_modes(cfg: VerifyConfig) -> list:
    """Modes with polarization along z x q_hat, so that q . F vanishes identically."""
    g, car = cfg.grid(), cfg.carrier()
    q = _q(g)
    qx, qy = q[..., 0], q[..., 1]
    r2 = (qx**2 + qy**2) * cfg.w0**2
    rng = np.random.default_rng(cfg.seed + 2)
    out = []
    for radial in (np.exp(-r2 / 4), (1 - r2 / 8) * np.exp(-r2 / 4), r2 * np.exp(-r2 / 4)):
        c = complex(rng.normal(), rng.normal())
        data = c * np.stack([-qy, qx], axis=-1) * radial[..., None]
        m = paraxial.ParaxialMode(car, ComplexVectorField(g, data, SPECTRAL, cfg.k))
        out.append(m)
    return out


def suite_consistency(cfg: VerifyConfig, rec: _Recorder):
    worst = qf = 0.0
    q = _q(cfg.grid())
    for m in azimuthal_modes(cfg):
        F = m.spectral.data
        qf = max(qf, np.max(np.abs(np.sum(q * F, axis=-1))))
        Fp = gauge.heno_lift(m).spectral3.data
        worst = max(worst, np.max(np.abs(Fp - gauge.embed(F))))
    rec.at_most("azimuthal test modes have q . F = 0", "q . F = 0", qf, cfg.tol("consistency"))
    rec.at_most("lift of gauge-compatible modes is the identity embedding",
                "F' = F whenever q . F = 0", worst, cfg.tol("consistency"))


def completeness_case(cfg: VerifyConfig):
    """Profile, evaluation points and oracle field for the completeness suite."""
    rng = np.random.default_rng(cfg.seed + 3)
    g = TransverseGrid(cfg.completeness_n, cfg.completeness_L)
    prof = exact.random_plane_wave_profile(rng, g, cfg.k, width=0.2, nkz=cfg.completeness_nkz)
    scale = 20 / cfg.k
    pts = _random_points(rng, cfg.completeness_points, 2 * scale, scale, scale)
    return prof, pts, exact.plane_wave_field(prof, pts)


def suite_completeness(cfg: VerifyConfig, rec: _Recorder):
    prof, pts, ref = completeness_case(cfg)
    lo, hi = exact.k_support(prof)
    nk = cfg.completeness_k_points
    errs = {}
    for count in (nk // 4, nk // 2, nk):
        dec = exact.decompose_heno(prof, np.linspace(lo, hi, count))
        rec_field = exact.reconstruct_from_heno(dec, pts)
        errs[count] = float(np.linalg.norm(rec_field - ref) / np.linalg.norm(ref))
    rec.report.series["completeness"] = {"k_points": list(errs), "relative_error": list(errs.values())}
    rec.at_most(f"reconstruction vs direct plane-wave quadrature ({nk} carriers)",
                "sum over k of henochromatic fields reproduces A+", errs[nk], cfg.tol("completeness"))
    rec.at_least(f"error reduction when carriers double {nk // 2} -> {nk}",
                 "trapezoid convergence in k", errs[nk // 2] / errs[nk], cfg.tol("completeness_ratio"))
    ks = np.linspace(lo, hi, 8)
    d1 = exact.decompose_heno(prof.with_rho(exact.UNIFORM3D), ks)
    d2 = exact.decompose_heno(prof.with_rho(exact.LIGHTCONE), ks)
    top = max(np.abs(d1[k].spectral.data).max() for k in ks)
    diff = max(np.abs(d1[k].spectral.data - d2[k].spectral.data).max() for k in ks) / top
    rec.at_most("decomposition independent of density of states",
                "F(q;k) independent of rho", diff, cfg.tol("rho_independence"))
    rec.at_most("plane-wave profile transversality", "k . A(k) = 0",
                prof.transversality_residual(), cfg.tol("transversality"))


def suite_dispersion(cfg: VerifyConfig, rec: _Recorder):
    q = _q(cfg.grid())
    w, kz = gauge.omega(q, cfg.k), gauge.kappa(q, cfg.k)
    q2 = q[..., 0] ** 2 + q[..., 1] ** 2
    rec.at_most("omega^2 = c^2 (kappa^2 + |q|^2) at every site (relative)",
                "omega = c sqrt(kappa^2 + |q|^2)",
                np.max(np.abs(w**2 - C**2 * (kz**2 + q2)) / w**2), cfg.tol("dispersion"))
    i0 = cfg.grid_n // 2
    rec.at_most("omega >= ck everywhere, equal at q = 0", "omega/c = k + |q|^2/4k",
                max(float(np.max(C * cfg.k - w)), abs(w[i0, i0] - C * cfg.k)), 0.0)
    mode = mode_set(VerifyConfig(**{**asdict(cfg), "pairs": 1}))[0][0]
    h = gauge.heno_lift(mode)
    rng = np.random.default_rng(cfg.seed + 4)
    lam = 2 * np.pi / cfg.k
    pts = _random_points(rng, 3, cfg.w0, 5 * lam, 5 * lam)
    spacings = [lam / 25, lam / 50, lam / 100]
    res = [max(wave_operator_residual(lambda p: gauge.evaluate_heno_field(h, p), p, sp)
               for p in pts) for sp in spacings]
    rec.report.series["wave_residual"] = {"spacing_over_lambda": [25, 50, 100], "residual": res}
    rec.at_most("finite-difference wave operator residual at h = lambda/50",
                "each component obeys omega^2 = c^2 |k|^2", res[1], cfg.tol("wave_residual"))
    order = math.log2(res[1] / res[2])
    rec.at_least("observed convergence order of the wave residual (lambda/50 -> lambda/100)",
                 "fourth-order stencil on an exact solution", order, cfg.tol("wave_order"))


def suite_paraxial_accuracy(cfg: VerifyConfig, rec: _Recorder):
    car = cfg.carrier()
    g = cfg.grid()
    hg = {(m, n): paraxial.hermite_gauss(m, n, cfg.w0, [1, 0], car, g)
          for m in range(4) for n in range(4)}
    keys = sorted(hg)
    gram = np.array([[paraxial.envelope_inner_product(hg[a], hg[b]) for b in keys] for a in keys])
    rec.at_most("HG_mn orthonormality, m, n <= 3", "<Xi_1|Xi_2> = int d^2q conj(F_1).F_2",
                np.max(np.abs(gram - np.eye(len(keys)))), cfg.tol("orthonormality"))
    a, b = mode_set(VerifyConfig(**{**asdict(cfg), "pairs": 1}))[0]
    zr = paraxial.rayleigh_range(cfg.w0, cfg.k)
    ref = paraxial.envelope_inner_product(a, b)
    dev = max(abs(paraxial.envelope_inner_product(a, b, z) - ref) / abs(ref)
              for z in (0.0, zr, 5 * zr))
    rec.at_most("position-space product identical on z = 0, z_R, 5 z_R",
                "same value for every cross-section", dev, cfg.tol("z_invariance"))
    norms = [propagated_norm(a, z) for z in (0.0, zr, 5 * zr)]
    rec.at_most("envelope norm conserved under propagation", "unimodular propagator",
                (max(norms) - min(norms)) / norms[0], cfg.tol("norm_invariance"))
    coarse = TransverseGrid(72, 6 * cfg.w0)
    fine = TransverseGrid(288, 6 * cfg.w0)
    zr_dz = min(1 / cfg.k, zr / 100)
    r1 = paraxial.paraxial_residual(paraxial.hermite_gauss(0, 0, cfg.w0, [1, 0], car, coarse), 0.0, zr_dz)
    r2 = paraxial.paraxial_residual(paraxial.hermite_gauss(0, 0, cfg.w0, [1, 0], car, fine), 0.0, zr_dz / 4)
    rec.at_least("paraxial residual drop when ds and dz are quartered", "second-order convergence",
                 r1 / r2, cfg.tol("residual_ratio"))
    spread = fwhm_ratio(hg[(0, 0)], zr)
    rec.at_most("HG_00 FWHM ratio at z_R vs sqrt(2)", "Gaussian beam spread",
                abs(spread / math.sqrt(2) - 1), cfg.tol("beam_spread"))

    # exact fields vs the paraxial model on the co-moving slice t = z / c
    rng = np.random.default_rng(cfg.seed + 5)
    coeffs = {(m, n, ax): complex(rng.normal(), rng.normal())
              for m in range(cfg.max_order + 1) for n in range(cfg.max_order + 1) for ax in (0, 1)}
    heno_err, mono_err, tails = [], [], []
    for kw0 in cfg.accuracy_kw0:
        w0 = kw0 / cfg.k
        L = 6 * w0 * math.sqrt(cfg.max_order + 1)
        grid = TransverseGrid(192, L)
        mode = paraxial.mode_superposition(coeffs, w0, car, grid).normalized()
        e_h, e_m = paraxial_discrepancy(mode, w0)
        heno_err.append(e_h)
        mono_err.append(e_m)
        tails.append(tail_mass(mode.spectral, cfg.k / 2))
    rec.report.series["paraxial_accuracy"] = {
        "k_w0": list(cfg.accuracy_kw0), "heno_error": heno_err, "mono_error": mono_err,
        "tail_mass_beyond_k_over_2": tails}
    rec.at_least("|A_pa - A_heno| decreases monotonically as k w0 doubles", "dropped terms of the kz expansion",
                 float(np.min(-np.diff(heno_err))), 0.0)
    rec.at_least("|A_pa - A_mono| decreases monotonically as k w0 doubles", "dropped terms of the kz expansion",
                 float(np.min(-np.diff(mono_err))), 0.0)


def propagated_norm(mode, z):
    return paraxial.propagate_envelope(mode, z).norm()


def fwhm_ratio(mode, z):
    g = mode.grid
    mid = g.n // 2

    def width(zz):
        env = paraxial.propagate_envelope(mode, zz).data
        return fwhm(np.sum(np.abs(env[:, mid]) ** 2, axis=-1), g.s)

    return width(z) / width(0.0)


def paraxial_discrepancy(mode, w0: float, n_slices: int = 5):
    """Relative L2 gaps of the henochromatic and monochromatic fields from ``A_pa``.

    Sampled on the whole lattice at ``z`` in ``[0, z_R(w0)]`` with ``t = z / c``,
    where the paraxial carrier phase is 1.
    """
    k = mode.k
    zr = paraxial.rayleigh_range(w0, k)
    h = gauge.heno_lift(mode)
    mc = exact.mc_complete(mode, k)
    kz_mc = mc.kz()
    num_h = num_m = den = 0.0
    for z in np.linspace(0, zr, n_slices):
        t = z / C
        pa = paraxial.propagate_envelope(mode, z).data
        pa3 = gauge.embed(pa) * np.exp(1j * k * (z - C * t))
        he = gauge.heno_slice(h, z, t).data
        phase = np.exp(1j * (kz_mc * z - C * k * t))
        mo = inverse_transform(mc.spectral3.replace(mc.spectral3.data * phase[..., None])).data
        num_h += np.sum(np.abs(he - pa3) ** 2)
        num_m += np.sum(np.abs(mo - pa3) ** 2)
        den += np.sum(np.abs(pa3) ** 2)
    return float(math.sqrt(num_h / den)), float(math.sqrt(num_m / den))


def suite_negative_controls(cfg: VerifyConfig, rec: _Recorder):
    g, car = cfg.grid(), cfg.carrier()
    modes = [m for pair in mode_set(cfg) for m in pair]
    modes += [paraxial.hermite_gauss(0, 0, cfg.w0, [1, 0], car, g),
              paraxial.hermite_gauss(cfg.max_order, cfg.max_order, cfg.w0, [1, 0], car, g)]
    ratios = []
    for m in modes:
        h = gauge.heno_lift(m)
        r = exact.relativistic_inner_product_reduced(h, h, gauge.MONOCHROMATIC)
        ratios.append(r.real / (C * cfg.k * m.norm() ** 2))
    spread = (max(ratios) - min(ratios)) / max(ratios)
    rec.report.series["negative_controls"] = {"monochromatic_ratios": ratios}
    rec.control("monochromatic dispersion: reduced/paraxial ratio varies across modes",
                "omega/|dkappa/dk| must be q-independent", spread, cfg.tol("control_omega"))
    worst = min(gauge.gauge_residual(gauge.unlifted(m)) for m in modes)
    rec.control("unlifted embedding (F, 0) fails the gauge check",
                "(q + kappa z) . F' = 0", worst, cfg.tol("gauge"))


SUITES = {
    "unitarity": suite_unitarity,
    "rotation": suite_rotation,
    "gauge": suite_gauge,
    "consistency": suite_consistency,
    "completeness": suite_completeness,
    "dispersion": suite_dispersion,
    "paraxial-accuracy": suite_paraxial_accuracy,
    "negative-controls": suite_negative_controls,
}


def run_suite(name: str, config: VerifyConfig | None = None) -> VerificationReport:
    if name not in SUITES:
        raise UnknownSuiteError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    cfg = config or VerifyConfig()
    env = {"config": cfg.to_dict(), "units": {"hbar": paraxial.HBAR, "c": C}}
    report = VerificationReport(name, env)
    rec = _Recorder(report)
    t0 = time.perf_counter()
    try:
        SUITES[name](cfg, rec)
    except Exception as exc:  # partial report on infrastructure failure
        report.error = f"{type(exc).__name__}: {exc}"
    report.timings["total"] = time.perf_counter() - t0
    return report


def run_all(config: VerifyConfig | None = None, names=SUITE_NAMES, threads: int = 1) -> list:
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda n: run_suite(n, config), names))
    return [run_suite(n, config) for n in names]


def write_report(reports, path) -> Path:
    """Write one JSON document: a single report or ``{"suites": [...], "passed": ...}``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(reports, VerificationReport):
        text = reports.to_json()
    else:
        doc = {"passed": all(r.passed for r in reports),
               "suites": [r.to_dict() for r in reports]}
        text = json.dumps(doc, indent=2, sort_keys=True, default=_jsonable)
    path.write_text(text + "\n")
    return path
