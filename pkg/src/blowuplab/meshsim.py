"""Direct simulation of the radial flow on a moving mesh.

The PDE

    u_t = u_rr + (d-1)/r u_r - k(d+k-2)/(2 r^2) sin(2u),   u(0,t) = 0

is discretized with 3-point finite differences on a nonuniform mesh whose
nodes move by equidistribution of the arclength-type monitor
M(r) = sqrt(alpha + u_r^2) (spatially smoothed, with a fraction of the
monitor mass spread uniformly to guard the outer region).  The mesh
velocity solves the elliptic moving-mesh equation
(dr/dt)_xixi = -gain (M r_xi)_xi, so node redistribution acts at the same
rate on all wavelengths.  Node motion adds the advective correction
r'_i u_r to the nodal time derivative.  The coupled (u, r) system is
integrated with an implicit stiff method (BDF) with error control; the
mesh response rate is held at a fixed multiple of the measured gradient
growth rate d log(sup u_r)/dt, so the mesh keeps up with the collapse
without making the system needlessly stiff.

Blow-up observables (the origin gradient, the global max gradient, the
energy, the mesh resolution) are recorded at every accepted step; rate
fitting recovers the power-law exponent 1/2 + beta or the logarithmic
law from the trace.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import BDF
from scipy.linalg import solveh_banded
from scipy.optimize import minimize_scalar

from .errors import (
    BadInitialData,
    DegenerateFit,
    MeshTangling,
    NoBlowup,
    StepSizeUnderflow,
    WindowTooShort,
)
from .params import ModelParams

#: node-relaxation rate as a multiple of the observed collapse rate
TRACKING_MARGIN = 25.0

#: sup-gradient growth factor per solver chunk; the collapse rate estimate
#: is frozen within a chunk and stales by ~ this factor^(1/(1/2+beta))
CHUNK_GROWTH = math.sqrt(2.0)

INITIAL_DATA_FAMILIES = {
    "r": lambda r: r,
    "r+sin(r)": lambda r: r + np.sin(r),
    "r-sin(r)": lambda r: r - np.sin(r),
}


@dataclass
class SimConfig:
    params: ModelParams
    L: float = 2.0
    M: int = 201                      # mesh nodes including both boundaries
    initial_data: str | tuple = "r"   # family name or (r, u) tables
    monitor_alpha: float = 1.0
    monitor_scale_weight: float = 1.0  # weight of the |u|/r term (see _monitor)
    monitor_smooth_passes: int = 4
    uniform_fraction: float = 0.1     # monitor mass reserved for the outer region
    tau: float = 0.1                  # mesh relaxation time at unit gradient
    rtol: float = 1e-7
    atol_u: float = 1e-9
    atol_r_rel: float = 1e-4          # node atol relative to the local spacing scale
    max_gradient: float = 1e8         # stop criterion on sup |u_r|
    t_max: float = 10.0
    snapshot_decades: float = 0.5     # snapshot every this many decades of sup|u_r|

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.M < 64:
            raise ValueError("M must be >= 64")
        if self.max_gradient < 1e6:
            raise ValueError("max_gradient must be >= 1e6")

    def to_dict(self):
        out = {
            "d": self.params.d, "k": self.params.k, "L": self.L, "M": self.M,
            "initial_data": self.initial_data if isinstance(self.initial_data, str)
            else "tabulated",
            "monitor_alpha": self.monitor_alpha,
            "monitor_scale_weight": self.monitor_scale_weight,
            "monitor_smooth_passes": self.monitor_smooth_passes,
            "uniform_fraction": self.uniform_fraction,
            "tau": self.tau, "rtol": self.rtol, "atol_u": self.atol_u,
            "atol_r_rel": self.atol_r_rel, "max_gradient": self.max_gradient,
            "t_max": self.t_max, "snapshot_decades": self.snapshot_decades,
        }
        return out


@dataclass
class MeshState:
    t: float
    r: np.ndarray   # strictly increasing, r[0]=0, r[-1]=L
    u: np.ndarray   # u[0]=0, u[-1] fixed

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "u"])
            for rj, uj in zip(self.r, self.u):
                writer.writerow([repr(float(rj)), repr(float(uj))])


@dataclass
class RunTrace:
    config: SimConfig
    t: np.ndarray
    dr_u0: np.ndarray        # du/dr at r=0 (one-sided, 2nd order)
    sup_grad: np.ndarray     # max over mesh of |du/dr|
    sup_grad_loc: np.ndarray  # location of the max gradient
    energy: np.ndarray
    min_dx: np.ndarray
    nodes_in_layer: np.ndarray  # nodes with r <= 5 / sup_grad
    snapshots: list = field(default_factory=list)
    stopped: str = "blowup"      # "blowup" | "roundoff" | "tmax"

    @property
    def no_blowup(self):
        # "roundoff" means the time increments ahead of the singularity fell
        # below the resolution of double-precision t -- which only happens
        # well inside a blow-up, so the trace is still fittable
        return self.stopped not in ("blowup", "roundoff")

    def to_csv(self, path):
        # the first five columns are the stable contract; the trailing two
        # let the rate fits recover their resolved window after a reload
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "dr_u0", "sup_grad", "energy", "min_dx",
                             "sup_grad_loc", "nodes_in_layer"])
            for row in zip(self.t, self.dr_u0, self.sup_grad, self.energy,
                           self.min_dx, self.sup_grad_loc,
                           self.nodes_in_layer):
                writer.writerow([repr(float(v)) for v in row])


def trace_from_csv(path, config=None, stopped="blowup"):
    """Rebuild a fit-capable RunTrace from a persisted trace table (no
    snapshots; those live in their own files)."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    return RunTrace(
        config=config,
        t=np.atleast_1d(data["t"]),
        dr_u0=np.atleast_1d(data["dr_u0"]),
        sup_grad=np.atleast_1d(data["sup_grad"]),
        sup_grad_loc=np.atleast_1d(data["sup_grad_loc"]),
        energy=np.atleast_1d(data["energy"]),
        min_dx=np.atleast_1d(data["min_dx"]),
        nodes_in_layer=np.atleast_1d(data["nodes_in_layer"]).astype(int),
        snapshots=[],
        stopped=stopped,
    )


@dataclass
class FitResult:
    kind: str                  # "power" | "log"
    T: float
    beta: float | None = None
    C: float | None = None
    s0: float | None = None
    residual: float = 0.0
    uncertainty: float = 0.0
    r_squared: float = 0.0
    window: tuple = (0.0, 0.0)

    def to_json(self):
        return json.dumps({k: v for k, v in self.__dict__.items()}, indent=2)


# ----------------------------------------------------------------------------
# spatial discretization helpers

def _gradients(r, u):
    """Midpoint gradients and the one-sided origin gradient."""
    dr = np.diff(r)
    gmid = np.diff(u) / dr
    r1, r2 = r[1], r[2]
    u1, u2 = u[1], u[2]
    g0 = (u1 * r2 * r2 - u2 * r1 * r1) / (r1 * r2 * (r2 - r1))
    return gmid, g0


def _monitor(config, r, u):
    """Smoothed midpoint monitor with the uniform reservation added.

    The arclength part sqrt(alpha + u_r^2) concentrates nodes in the
    boundary layer, but leaves the self-similar transition region between
    the layer scale and O(sqrt(T-t)) -- where u is near its plateau and
    u_r is small -- with almost no mass, and that region carries the slow
    dynamics that set the blow-up rate.  The |u|/r term equidistributes
    log-uniformly in r between those scales (its mass per decade of r is
    constant once u plateaus), the moving-mesh analogue of a geometrically
    graded fixed mesh."""
    gmid, _ = _gradients(r, u)
    m = np.sqrt(config.monitor_alpha + gmid * gmid)
    if config.monitor_scale_weight > 0.0:
        rmid = 0.5 * (r[:-1] + r[1:])
        umid = 0.5 * (u[:-1] + u[1:])
        m = m + config.monitor_scale_weight * np.abs(umid) / rmid
    for _ in range(config.monitor_smooth_passes):
        sm = np.empty_like(m)
        sm[1:-1] = 0.25 * m[:-2] + 0.5 * m[1:-1] + 0.25 * m[2:]
        sm[0] = 0.75 * m[0] + 0.25 * m[1]
        sm[-1] = 0.75 * m[-1] + 0.25 * m[-2]
        m = sm
    mass = float(np.sum(m * np.diff(r)))
    m = m + config.uniform_fraction * mass / config.L
    return m


def _pde_rhs(config, r, u, rdot):
    """Nodal du/dt at interior nodes: physics plus advective correction.

    The advective term r'_i u_r uses the same centered 3-point stencil as
    the physics: one-sided differencing adds an O(|r'| dr) artificial
    diffusion (or anti-diffusion) that measurably shifts the collapse rate
    at the resolutions used here."""
    d, k = config.params.d, config.params.k
    torque = k * (d + k - 2.0)
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    um, uc, up = u[:-2], u[1:-1], u[2:]
    ur = (-hp / (hm * (hm + hp))) * um + ((hp - hm) / (hm * hp)) * uc \
        + (hm / (hp * (hm + hp))) * up
    urr = 2.0 * (um / (hm * (hm + hp)) - uc / (hm * hp) + up / (hp * (hm + hp)))
    rc = r[1:-1]
    phys = urr + (d - 1.0) / rc * ur - torque / (2.0 * rc * rc) * np.sin(2.0 * uc)
    return phys + rdot * ur


def _mesh_rhs(config, r, u, gain):
    """Equidistribution velocity for interior nodes from the elliptic form

        (dr/dt)_xixi = -gain * (M r_xi)_xi,   dr/dt = 0 at both ends,

    solved as a tridiagonal system each evaluation.  Defining the velocity
    through the inverse Laplacian (rather than pointwise relaxation) makes
    the node-redistribution rate uniform across wavelengths; a pointwise
    relaxation moves mass between distant mesh regions slower by the square
    of the node count and starves a collapsing layer of nodes."""
    m = _monitor(config, r, u)
    c = m * np.diff(r)               # per-cell monitor mass
    rhs = gain * (c[1:] - c[:-1])
    n = rhs.size
    ab = np.empty((2, n))
    ab[0, :] = -1.0                  # superdiagonal of tridiag(-1, 2, -1)
    ab[1, :] = 2.0
    return solveh_banded(ab, rhs)


def _energy(config, r, u):
    """Dirichlet energy by the midpoint rule."""
    d, k = config.params.d, config.params.k
    dr = np.diff(r)
    gmid = np.diff(u) / dr
    rmid = 0.5 * (r[:-1] + r[1:])
    umid = 0.5 * (u[:-1] + u[1:])
    dens = gmid * gmid + k * (d + k - 2.0) * np.sin(umid) ** 2 / (rmid * rmid)
    return 0.5 * float(np.sum(dens * rmid ** (d - 1.0) * dr))


# ----------------------------------------------------------------------------
# initialization

def _initial_profile(config):
    if isinstance(config.initial_data, str):
        try:
            fam = INITIAL_DATA_FAMILIES[config.initial_data]
        except KeyError:
            raise BadInitialData(
                f"unknown initial data family {config.initial_data!r}"
            ) from None
        return fam
    r_tab, u_tab = (np.asarray(a, dtype=float) for a in config.initial_data)
    if abs(u_tab[0]) > 1e-14 or abs(r_tab[0]) > 1e-14:
        raise BadInitialData("tabulated initial data must have u(0) = 0")

    def fam(r):
        return np.interp(r, r_tab, u_tab)

    return fam


def initialize(config):
    """Sample the initial data on a mesh pre-equidistributed against its own
    monitor (a few de Boor sweeps)."""
    fam = _initial_profile(config)
    r = np.linspace(0.0, config.L, config.M)
    u = fam(r)
    if abs(u[0]) > 1e-14:
        raise BadInitialData("initial data must satisfy u(0) = 0")
    for _ in range(6):
        m = _monitor(config, r, u)
        cum = np.concatenate([[0.0], np.cumsum(m * np.diff(r))])
        levels = np.linspace(0.0, cum[-1], config.M)
        r = np.interp(levels, cum, r)
        r[0], r[-1] = 0.0, config.L
        u = fam(r)
    u[0] = 0.0
    return MeshState(t=0.0, r=r, u=u)


# ----------------------------------------------------------------------------
# time stepping

def _pack(state):
    return np.concatenate([state.u[1:-1], state.r[1:-1]])


def _unpack(config, y, uL):
    n = config.M - 2
    u = np.concatenate([[0.0], y[:n], [uL]])
    r = np.concatenate([[0.0], y[n:], [config.L]])
    return r, u


def _make_rhs(config, uL, gain):
    def rhs(t, y):
        r, u = _unpack(config, y, uL)
        rdot = _mesh_rhs(config, r, u, gain)
        udot = _pde_rhs(config, r, u, rdot)
        return np.concatenate([udot, rdot])

    return rhs


def step(config, state, gain=None, dt_max=np.inf):
    """Advance one accepted implicit step; mostly a testing convenience,
    run() drives the same machinery in chunks."""
    if gain is None:
        gmid, g0 = _gradients(state.r, state.u)
        gmax = max(float(np.max(np.abs(gmid))), abs(g0))
        gain = (1.0 / config.tau) / (1.0 + gmax)
    solver = _new_solver(config, state, gain, t_bound=state.t + dt_max)
    solver.step()
    if solver.status == "failed":
        raise StepSizeUnderflow("implicit step failed; increase M or tolerances")
    r, u = _unpack(config, solver.y, state.u[-1])
    if np.any(np.diff(r) <= 0.0):
        raise MeshTangling("node ordering violated")
    return MeshState(t=solver.t, r=r, u=u)


def _new_solver(config, state, gain, t_bound):
    n = config.M - 2
    atol = np.empty(2 * n)
    atol[:n] = config.atol_u
    spacing = np.diff(state.r)
    local = np.minimum(spacing[:-1], spacing[1:])
    atol[n:] = config.atol_r_rel * local
    # the inverse-Laplacian mesh velocity couples every node pair, so the
    # Jacobian is treated as dense
    return BDF(
        _make_rhs(config, state.u[-1], gain),
        state.t,
        _pack(state),
        t_bound=t_bound,
        rtol=config.rtol,
        atol=atol,
    )


def run(config, progress=None):
    """Step until sup|u_r| >= max_gradient or t >= t_max, recording
    observables at every accepted step and snapshots on a gradient ladder."""
    state = initialize(config)
    uL = state.u[-1]

    rows = []
    snapshots = [MeshState(state.t, state.r.copy(), state.u.copy())]
    next_snap = 10.0 ** config.snapshot_decades
    stopped = "tmax"

    def observe(t, r, u):
        gmid, g0 = _gradients(r, u)
        gmax = max(float(np.max(np.abs(gmid))), abs(g0))
        j = int(np.argmax(np.abs(gmid)))
        loc = 0.0 if abs(g0) >= float(np.abs(gmid[j])) else 0.5 * (r[j] + r[j + 1])
        rows.append((
            t, g0, gmax, loc, _energy(config, r, u),
            float(np.min(np.diff(r))),
            int(np.sum(r <= 5.0 / gmax)),
        ))
        return gmax

    gmax = observe(state.t, state.r, state.u)
    rtol = config.rtol
    qhat = 0.0   # measured growth rate d log(sup u_r)/dt of the last chunk
    while True:
        # the node-relaxation rate is gain * monitor ~ gain * gmax; tie it
        # to the observed collapse rate with a fixed margin, so the mesh
        # tracks the layer without making the system orders of magnitude
        # stiffer than the physics (which starves BDF of step size)
        rate = max(TRACKING_MARGIN * qhat, 1.0 / config.tau)
        gain = rate / (1.0 + gmax)
        chunk_limit = CHUNK_GROWTH * gmax  # refresh the frozen gain as the layer sharpens
        t_chunk, g_chunk = state.t, gmax
        solver = _new_solver(replace(config, rtol=rtol), state, gain,
                             t_bound=config.t_max)
        chunk_start = (state, len(rows), len(snapshots), next_snap)
        failed = None
        while solver.status == "running":
            solver.step()
            if solver.status == "failed":
                failed = "step"
                break
            r, u = _unpack(config, solver.y, uL)
            if np.any(np.diff(r) <= 0.0):
                failed = "tangle"
                break
            state = MeshState(t=solver.t, r=r, u=u)
            gmax = observe(state.t, r, u)
            if gmax >= next_snap:
                snapshots.append(MeshState(state.t, r.copy(), u.copy()))
                next_snap = 10.0 ** (
                    math.floor(math.log10(gmax) / config.snapshot_decades + 1)
                    * config.snapshot_decades
                )
            if progress is not None:
                progress(state.t, gmax)
            if gmax >= config.max_gradient:
                stopped = "blowup"
                break
            if gmax >= chunk_limit:
                break
        if failed:
            # reject the chunk: restart it from its starting state, tighter
            rtol *= 0.1
            state, n_rows, n_snaps, next_snap = chunk_start
            del rows[n_rows:]
            del snapshots[n_snaps:]
            gmid, g0 = _gradients(state.r, state.u)
            gmax = max(float(np.max(np.abs(gmid))), abs(g0))
            if rtol < 1e-13:
                if failed == "tangle":
                    raise MeshTangling(
                        "mesh cannot be kept ordered even at rtol=1e-13; increase M"
                    )
                if gmax >= 1e3:
                    # deep in the collapse T - t can shrink below the spacing
                    # of representable times near t; the integrator then has
                    # no step left to take and the run is over
                    stopped = "roundoff"
                    break
                raise StepSizeUnderflow(
                    "implicit step kept failing at rtol=1e-13 away from blow-up"
                )
            continue
        rtol = config.rtol
        if state.t > t_chunk and gmax > g_chunk:
            qhat = math.log(gmax / g_chunk) / (state.t - t_chunk)
        if stopped == "blowup" or solver.status == "finished":
            break

    snapshots.append(MeshState(state.t, state.r.copy(), state.u.copy()))
    arr = np.array(rows)
    return RunTrace(
        config=config,
        t=arr[:, 0],
        dr_u0=arr[:, 1],
        sup_grad=arr[:, 2],
        sup_grad_loc=arr[:, 3],
        energy=arr[:, 4],
        min_dx=arr[:, 5],
        nodes_in_layer=arr[:, 6].astype(int),
        snapshots=snapshots,
        stopped=stopped,
    )


# ----------------------------------------------------------------------------
# rate fitting

def _subsample_log(t, g, per_decade=120):
    """Thin the trace to roughly uniform spacing in log(g) before
    differencing, to suppress step-to-step noise.  Returns kept indices."""
    keep = [0]
    last = math.log10(g[0])
    for j in range(1, t.size):
        lg = math.log10(g[j])
        if lg - last >= 1.0 / per_decade:
            keep.append(j)
            last = lg
    return np.array(keep)


#: a scale counts as resolved while at least this many nodes sit inside it
MIN_LAYER_NODES = 20


def _resolved_window(trace):
    """Kept (subsampled) indices of the resolved part of the trace: the
    longest contiguous stretch with enough nodes inside the layer.  The
    recorded gradient is not trustworthy outside it."""
    idx = _subsample_log(trace.t, np.abs(trace.dr_u0))
    ok = trace.nodes_in_layer[idx] >= MIN_LAYER_NODES
    best, run, start, best_start = 0, 0, 0, 0
    for j, flag in enumerate(ok):
        if flag:
            if run == 0:
                start = j
            run += 1
            if run > best:
                best, best_start = run, start
        else:
            run = 0
    if best < 12:
        raise WindowTooShort("no resolved stretch of 12+ samples in the trace")
    return idx[best_start:best_start + best]


def fit_power(trace, window_decades=3.0):
    """Power-law fit from the log-derivative of the origin gradient.

    q(t) = d log(dr_u0)/dt equals (1/2+beta)/(T-t) for a pure power law,
    so 1/q is linear in t with root T; a line fit over the late resolved
    window gives T and beta.  The fit is done in time centered on the
    window start -- the raw times agree to many digits near blow-up and
    would cancel catastrophically in the normal equations."""
    if trace.no_blowup:
        raise NoBlowup("trace ended before the stop criterion")
    idx = _resolved_window(trace)
    t = trace.t[idx]
    g = np.abs(trace.dr_u0[idx])
    mask = g >= g[-1] / 10.0**window_decades
    t, g = t[mask], g[mask]
    if t.size < 12:
        raise WindowTooShort("fewer than 12 samples in the power-fit window")
    t0 = t[0]
    tm = 0.5 * (t[1:] + t[:-1]) - t0
    q = np.diff(np.log(g)) / np.diff(t)
    good = q > 0
    tm, q = tm[good], q[good]
    if tm.size < 10:
        raise WindowTooShort("fewer than 10 positive-growth samples")
    invq = 1.0 / q
    (b, a), cov = np.polyfit(tm, invq, 1, cov=True)
    if b >= 0:
        raise DegenerateFit("1/q does not decrease toward blow-up")
    # 1/q = (T - t)/(1/2+beta): slope -1/(1/2+beta), root at t = T
    expo = -1.0 / b
    beta = expo - 0.5
    T = t0 - a / b
    resid = float(np.sqrt(np.mean((a + b * tm - invq) ** 2)))
    dbeta = math.sqrt(max(float(cov[0, 0]), 0.0)) / (b * b)
    # the statistical error bar is far too optimistic when the local
    # exponent still drifts across the window; report the half-window
    # sensitivity when it dominates
    half = tm.size // 2
    betas = []
    for sl in (slice(None, half), slice(half, None)):
        if tm[sl].size >= 5:
            bh = np.polyfit(tm[sl], invq[sl], 1)[0]
            if bh < 0:
                betas.append(-1.0 / bh - 0.5)
    if len(betas) == 2:
        dbeta = max(dbeta, 0.5 * abs(betas[0] - betas[1]))
    return FitResult(kind="power", T=T, beta=beta, residual=resid,
                     uncertainty=dbeta,
                     window=(float(t[0]), float(t[-1])))


def fit_log(trace, delta=1.0, window_efolds=6.0):
    """Logarithmic-law fit: sqrt(T-t) dr_u0 = C (-log(T-t) - s0)^{1/delta}.

    With T fixed the model is linear in -log(T-t) after raising to the
    delta power, so an inner linear solve sits under a 1-D search over T."""
    if trace.no_blowup:
        raise NoBlowup("trace ended before the stop criterion")
    idx = _resolved_window(trace)
    t = trace.t[idx]
    g = np.abs(trace.dr_u0[idx])
    t_end = t[-1]
    # parabolic scaling puts T - t_end near 1/sup_grad^2 scale
    dt_guess = (1.0 / g[-1]) ** 2

    def misfit(log_dt):
        T = t_end + math.exp(log_dt)
        x = -np.log(T - t)
        z = (np.sqrt(T - t) * g) ** delta
        mask = x >= x[-1] - window_efolds
        if np.sum(mask) < 20:
            return 1e30
        b, a = np.polyfit(x[mask], z[mask], 1)
        if b <= 0:
            # the model slope is C^delta > 0; negative-slope minima are
            # spurious branches of the T search
            return 1e30
        return float(np.mean((a + b * x[mask] - z[mask]) ** 2))

    res = minimize_scalar(
        misfit,
        bounds=(math.log(dt_guess * 1e-3), math.log(dt_guess * 1e5)),
        method="bounded",
        options={"xatol": 1e-12},
    )
    if not res.success or res.fun >= 1e29:
        raise DegenerateFit("outer search over T failed")
    T = t_end + math.exp(res.x)
    x = -np.log(T - t)
    z = (np.sqrt(T - t) * g) ** delta
    mask = x >= x[-1] - window_efolds
    if np.sum(mask) < 20:
        raise WindowTooShort("fewer than 20 samples in the log-fit window")
    b, a = np.polyfit(x[mask], z[mask], 1)
    if b <= 0:
        raise DegenerateFit("non-positive slope in the log-law fit")
    C = b ** (1.0 / delta)
    s0 = -a / b
    pred = a + b * x[mask]
    ss_res = float(np.sum((z[mask] - pred) ** 2))
    ss_tot = float(np.sum((z[mask] - np.mean(z[mask])) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return FitResult(kind="log", T=T, C=C, s0=s0,
                     residual=math.sqrt(ss_res / np.sum(mask)),
                     r_squared=r2,
                     window=(float(x[mask][0]), float(x[mask][-1])))


@dataclass
class SelfSimilarSnapshot:
    s: float
    y: np.ndarray
    f: np.ndarray


def to_self_similar(state, T):
    """Rescale a snapshot to (y, s, f) variables for spectral projection and
    comparison with the matched ansatz."""
    if state.t >= T:
        raise ValueError("snapshot time must precede the blow-up time")
    tau = T - state.t
    return SelfSimilarSnapshot(
        s=-math.log(tau),
        y=state.r / math.sqrt(tau),
        f=state.u.copy(),
    )
