"""Seeded acceptance suite: every contract of the package verified end to
end at desk scale, with one result row per check.

The suite is deterministic in its seed. Expensive artifacts (evolved
states, recursion runs) are built once and shared between criteria; the
criteria that carry runtime budgets time the builds they trigger.
"""

import time
from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize

from .asymptotics import (
    JordanSpectrum,
    empirical_growth_fit,
    fit_times,
    growth_exponents,
    norm_growth_samples,
)
from .continuous import (
    PotentialSpec,
    darboux_matrix,
    dynamical_solution,
    evolve_closed_form,
    evolve_ode,
    intertwining_residual,
    l2_identity,
    schrodinger_residuals,
    transform_eigenfunction,
    transformed_potential,
)
from .discrete import (
    JacobiData,
    build_initial_jacobi,
    discrete_solution,
    dynamical_residual,
    eigen_blocks,
    run_recursion,
    transform_jacobi,
    xi_tilde_checks,
)
from .linalg import frob, inv_hpd, is_posdef
from .params import ParameterTriple
from .sampling import (
    continuous_triple,
    discrete_triple,
    growth_scalar_triple,
    jacobi_sequences,
    jordan_block_triple,
    random_dims,
    random_g,
    scalar_eigen_triple,
    soliton_triple,
)

N_CONT_CASES = 20
N_DISC_CASES = 20
N_BOUNDARY_CASES = 5
N_FIT_SEEDS = 5
DISCRETE_STEPS = 50


@dataclass(frozen=True)
class CheckResult:
    """One verified claim: measured value against its pinned tolerance."""

    name: str
    value: float
    tol: float
    passed: bool
    note: str = ""


def _check(name, value, tol, note="", lower_is_pass=True):
    passed = value <= tol if lower_is_pass else value >= tol
    return CheckResult(name=name, value=float(value), tol=float(tol), passed=passed, note=note)


def fit_sech_profile(xs, values, kappa):
    """Least-squares fit of values ~ c * sech^2(kappa x + phi).

    The amplitude is solved linearly for each candidate shift, so only the
    shift is optimized: a bounded scalar minimization seeded at the
    profile minimum, then polished by root-finding on the analytic
    derivative of the projection functional (plain minimization stalls at
    sqrt(eps) in the shift). Returns (c, phi, max pointwise error).
    """
    xs = np.asarray(xs, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    phi0 = -kappa * xs[int(np.argmin(values))]

    def neg_projection(phi):
        s = 1.0 / np.cosh(kappa * xs + phi) ** 2
        return -((values @ s) ** 2) / (s @ s)

    def projection_derivative(phi):
        z = kappa * xs + phi
        s = 1.0 / np.cosh(z) ** 2
        sp = -2.0 * s * np.tanh(z)
        p, q = values @ s, s @ s
        pp, qp = values @ sp, 2.0 * (s @ sp)
        return (2.0 * p * pp * q - p * p * qp) / (q * q)

    res = scipy.optimize.minimize_scalar(
        neg_projection,
        bounds=(phi0 - 1.0, phi0 + 1.0),
        method="bounded",
        options={"xatol": 1e-12},
    )
    phi = float(res.x)
    for width in (1e-6, 1e-4, 1e-2):
        lo, hi = phi - width, phi + width
        if projection_derivative(lo) * projection_derivative(hi) < 0:
            phi = float(scipy.optimize.brentq(
                projection_derivative, lo, hi, xtol=1e-15, rtol=8.9e-16
            ))
            break
    s = 1.0 / np.cosh(kappa * xs + phi) ** 2
    c = float((values @ s) / (s @ s))
    return c, phi, float(np.max(np.abs(c * s - values)))


class AcceptanceSuite:
    """Builds the seeded inputs once and runs the acceptance criteria."""

    CRITERIA = {
        1: "identity_propagation",
        2: "closed_form_vs_ode",
        3: "transformed_equation_residuals",
        4: "soliton_reproduction",
        5: "l2_identity",
        6: "darboux_intertwining",
        7: "discrete_identity_chain",
        8: "discrete_eigen_relations",
        9: "growth_exponents",
        10: "degenerate_transform",
        11: "cli_determinism",
    }

    def __init__(self, seed=0, tol_scale=1.0):
        self.seed = int(seed)
        self.tol_scale = float(tol_scale)
        self._cache = {}

    # -- seeded inputs -------------------------------------------------

    def _rng(self, salt):
        return np.random.default_rng([self.seed, salt])

    def _memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def _tol(self, base):
        return base * self.tol_scale

    def cont_triples(self):
        def build():
            rng = self._rng(1)
            out = []
            for _ in range(N_CONT_CASES):
                n, h = random_dims(rng)
                out.append(continuous_triple(rng, n, h))
            return out

        return self._memo("cont_triples", build)

    @staticmethod
    def _grid(length, step=1e-3):
        return np.linspace(0.0, length, round(length / step) + 1)

    def _warm_kernels(self):
        """Compile (or load from cache) the jitted sweeps before any timed
        section; the one-off compilation cost is not part of the budgets."""

        def build():
            triple = soliton_triple(1.0)
            xs = np.array([0.0, 1e-3])
            evolve_ode(triple, PotentialSpec.zero(1), xs)
            evolve_closed_form(triple, xs)
            return True

        return self._memo("warm", build)

    def ode_states(self):
        """The 40 RK4 sweeps of the identity-propagation criterion
        (u = 0 and u = const), with their build wall time."""

        def build():
            self._warm_kernels()
            rng = self._rng(2)
            xs = self._grid(5.0)
            t0 = time.perf_counter()
            zero, const = [], []
            for triple in self.cont_triples():
                h = triple.h
                zero.append(evolve_ode(triple, PotentialSpec.zero(h), xs))
                c = float(rng.uniform(-1.0, 1.0))
                u = PotentialSpec.tabulated(
                    xs, np.broadcast_to(c * np.eye(h), (xs.size, h, h))
                )
                const.append(evolve_ode(triple, u, xs))
            return zero, const, time.perf_counter() - t0

        return self._memo("ode_states", build)

    def closed_states(self):
        def build():
            xs = self._grid(5.0)
            return [evolve_closed_form(t, xs) for t in self.cont_triples()]

        return self._memo("closed_states", build)

    def long_states(self):
        def build():
            xs = self._grid(10.0)
            return [evolve_closed_form(t, xs) for t in self.cont_triples()]

        return self._memo("long_states", build)

    def soliton_states(self):
        def build():
            xs = self._grid(10.0)
            return {k: evolve_closed_form(soliton_triple(k), xs) for k in (0.5, 1.0, 2.0)}

        return self._memo("soliton_states", build)

    def discrete_runs(self):
        def build():
            rng = self._rng(3)
            out = []
            for _ in range(N_DISC_CASES):
                n, h = random_dims(rng)
                triple = discrete_triple(rng, n, h)
                data = jacobi_sequences(rng, h, DISCRETE_STEPS + 1)
                traj = run_recursion(triple, data, DISCRETE_STEPS)
                out.append((traj, transform_jacobi(traj)))
            return out

        return self._memo("discrete_runs", build)

    def boundary_runs(self):
        def build():
            rng = self._rng(4)
            runs = []
            triple = scalar_eigen_triple()
            data = JacobiData.constant(
                np.eye(1, dtype=complex), np.zeros((1, 1), dtype=complex),
                DISCRETE_STEPS + 1,
            )
            traj = run_recursion(triple, data, DISCRETE_STEPS)
            runs.append((traj, transform_jacobi(traj)))
            for _ in range(N_BOUNDARY_CASES):
                n, h = random_dims(rng)
                t = discrete_triple(rng, n, h, first_block_zero=True)
                d = jacobi_sequences(rng, h, DISCRETE_STEPS + 1)
                tr = run_recursion(t, d, DISCRETE_STEPS)
                runs.append((tr, transform_jacobi(tr)))
            return runs

        return self._memo("boundary_runs", build)

    # -- criteria ------------------------------------------------------

    def identity_propagation(self):
        zero, const, seconds = self.ode_states()
        worst = 0.0
        for st in zero + const:
            scale = 1.0 + frob(st.triple.a) * float(
                np.max(np.linalg.norm(st.s, axis=(1, 2)))
            )
            worst = max(worst, st.id_drift / scale)
        return [
            _check("identity-propagation drift (normalized)", worst, self._tol(1e-9)),
            _check(
                "identity-propagation runtime [s]",
                seconds,
                10.0,
                note=f"{2 * N_CONT_CASES} RK4 sweeps on [0,5] at step 1e-3",
            ),
        ]

    def closed_form_vs_ode(self):
        zero, _, _ = self.ode_states()
        worst = 0.0
        for st_o, st_c in zip(zero, self.closed_states()):
            worst = max(
                worst,
                float(np.max(np.abs(st_o.pi - st_c.pi))),
                float(np.max(np.abs(st_o.s - st_c.s))),
            )
        return [_check("closed-form vs RK4 agreement", worst, self._tol(1e-8))]

    def transformed_equation_residuals(self):
        zero, const, _ = self.ode_states()
        states = list(zero) + list(const) + [self.soliton_states()[1.0]]
        chain = 0.0
        fd = 0.0
        for st in states:
            res = schrodinger_residuals(st, ts=(0.0, 1.0))
            chain = max(chain, res["elliptic_chain"])
            fd = max(fd, res["space_fd"])
        return [
            _check("transformed-equation analytic-chain residual", chain, self._tol(1e-9)),
            _check("transformed-equation central-difference residual", fd, self._tol(1e-4)),
        ]

    def soliton_reproduction(self):
        out = []
        amp_worst = 0.0
        fit_worst = 0.0
        wave_worst = 0.0
        for kappa, st in self.soliton_states().items():
            ut = transformed_potential(st)[:, 0, 0].real
            c, _, err = fit_sech_profile(st.xs, ut, kappa)
            amp_worst = max(amp_worst, abs(c + 2.0 * kappa**2))
            fit_worst = max(fit_worst, err)
            kw = 1.1
            y = lambda x: np.array([np.exp(1j * kw * x)])
            yp = lambda x: np.array([1j * kw * np.exp(1j * kw * x)])
            wave = transform_eigenfunction(st, y, yp, kw**2)
            wave_worst = max(wave_worst, wave.residual)
        out.append(_check("soliton amplitude error |c + 2 kappa^2|", amp_worst, self._tol(1e-6)))
        out.append(_check("soliton pointwise sech^2 fit error", fit_worst, self._tol(1e-8)))
        out.append(
            _check("soliton plane-wave transform residual", wave_worst, self._tol(1e-8))
        )
        return out

    def l2_identity(self):
        worst = 0.0
        order_ok = True
        for st in self.long_states():
            prev = None
            for ell in (1.0, 5.0, 10.0):
                lhs, rhs = l2_identity(st, ell)
                worst = max(worst, frob(lhs - rhs))
                if prev is not None:
                    order_ok &= bool(np.linalg.eigvalsh(lhs - prev)[0] > -1e-10)
                prev = lhs
            s0_inv = inv_hpd(st.triple.s0)
            ok, _ = is_posdef(s0_inv - rhs)
            order_ok &= ok
        return [
            _check("square-summability identity residual", worst, self._tol(1e-8)),
            CheckResult(
                name="square-summability monotone bound",
                value=0.0 if order_ok else 1.0,
                tol=0.0,
                passed=order_ok,
                note="running integral non-decreasing and below S(0)^{-1}",
            ),
        ]

    def darboux_intertwining(self):
        zero, const, _ = self.ode_states()
        rng = self._rng(5)
        worst = 0.0
        for st in zero + const:
            rho = float(np.max(np.abs(np.linalg.eigvals(st.triple.a))))
            for _ in range(10):
                x = float(rng.uniform(0.5, 4.5))
                radius = rho + 1.0 + float(rng.uniform(0.0, 1.0))
                angle = float(rng.uniform(0.0, 2.0 * np.pi))
                lam = radius * np.exp(1j * angle)
                worst = max(worst, intertwining_residual(st, lam, x, delta=1e-4))
        return [_check("Darboux intertwining residual", worst, self._tol(1e-5))]

    def discrete_identity_chain(self):
        ids = 0.0
        uni = 0.0
        cbr = 0.0
        fac = 0.0
        fwd = 0.0
        skipped = 0
        for traj, transformed in self.discrete_runs():
            ids = max(ids, float(traj.id_residuals.max()))
            rep = xi_tilde_checks(traj, transformed)
            uni = max(uni, rep.j_unitarity)
            cbr = max(cbr, rep.cbreve_inverse)
            fwd = max(fwd, rep.forward_identity)
            if rep.factorization_skipped:
                skipped += 1
            else:
                fac = max(fac, rep.factorization)
        note = f"{skipped} run(s) skipped (singular A)" if skipped else ""
        return [
            _check("discrete identity chain", ids, self._tol(1e-10)),
            _check("transformed recursion matrix j-unitarity", uni, self._tol(1e-10)),
            _check("transformed recursion inverse block", cbr, self._tol(1e-10)),
            _check("transfer factorization residual", fac, self._tol(1e-9), note=note),
            _check("forward recursion identity", fwd, self._tol(1e-10)),
        ]

    def discrete_eigen_relations(self):
        t0 = time.perf_counter()
        rows = 0.0
        dyn = 0.0
        for traj, transformed in self.boundary_runs():
            eb = eigen_blocks(traj, transformed)
            rows = max(rows, float(eb.row_residuals.max()))
            a = traj.triple.a
            res = dynamical_residual(eb, transformed, a, [0.1, 1.0, 10.0])
            dyn = max(dyn, res / (1.0 + frob(a)))
        seconds = time.perf_counter() - t0
        return [
            _check("eigen-relation row residuals", rows, self._tol(1e-9)),
            _check("discrete dynamical residual (normalized)", dyn, self._tol(1e-9)),
            _check("discrete eigen-relation runtime [s]", seconds, 5.0),
        ]

    def growth_exponents(self):
        cases = [
            ([(1j, 1), (-1j, 1)], (1.0, -1.0, 0, 0)),
            ([(0.0, 3)], (0.0, 0.0, 2, 2)),
            ([(1.0, 1), (-2.0, 1)], (0.0, 0.0, 0, 0)),
        ]
        exact_ok = True
        for blocks, expected in cases:
            g = growth_exponents(JordanSpectrum.declared(blocks))
            exact_ok &= (g.tau_plus, g.tau_minus, g.r_plus, g.r_minus) == expected
        out = [
            CheckResult(
                name="growth exponents on reference spectra",
                value=0.0 if exact_ok else 1.0,
                tol=0.0,
                passed=exact_ok,
                note="exact arithmetic over declared blocks",
            )
        ]

        state_a = evolve_closed_form(growth_scalar_triple(), self._grid(5.0))
        spec_a = JordanSpectrum.declared([(1j, 1)], u=np.eye(1))
        out.append(
            self._fit_check(
                "pure exponential growth fit", state_a, spec_a, tau=1.0, r=0.0, salt=6
            )
        )
        state_b = evolve_closed_form(jordan_block_triple(), self._grid(5.0))
        spec_b = JordanSpectrum.declared([(0.0, 2)], u=np.eye(2))
        out.append(
            self._fit_check(
                "Jordan-block polynomial growth fit", state_b, spec_b, tau=0.0, r=1.0, salt=7
            )
        )
        return out

    def _fit_check(self, name, state, spectrum, tau, r, salt):
        rng = self._rng(salt)
        ts = fit_times(tau)
        hits = 0
        for _ in range(N_FIT_SEEDS):
            g = random_g(rng, state.n)
            norms = norm_growth_samples(state, g, ts, spectrum=spectrum)
            fit = empirical_growth_fit(ts, norms)
            hits += abs(fit.tau - tau) <= 1e-2 and abs(fit.r - r) <= 0.1
        return _check(
            name,
            hits,
            4.0,
            note=f"{hits}/{N_FIT_SEEDS} seeded directions within tolerance",
            lower_is_pass=False,
        )

    def degenerate_transform(self):
        ok = True
        notes = []

        n, h = 2, 2
        triple = ParameterTriple.make(
            np.diag([0.3, -0.4]), np.eye(n), np.zeros((n, 2 * h)), "continuous"
        )
        xs = self._grid(2.0, 1e-2)
        u_vals = np.zeros((xs.size, h, h), dtype=complex)
        u_vals[:, 0, 0] = 0.25 * np.cos(xs)
        u_vals[:, 1, 1] = -0.1
        u = PotentialSpec.tabulated(xs, u_vals)
        for st in (
            evolve_closed_form(triple, xs),
            evolve_ode(triple, u, xs),
        ):
            ut = transformed_potential(st)
            ok &= np.array_equal(ut, st.u.values_on(xs))
            psi = dynamical_solution(st, [0.0, 1.0])
            ok &= not psi.any()
            w = darboux_matrix(st, 1.5 + 0.5j, 1.0)
            ok &= np.array_equal(w, np.eye(2 * h))
        if not ok:
            notes.append("continuous path differs")

        dt = ParameterTriple.make(
            np.diag([0.2, 0.5]), np.eye(2), np.zeros((2, 2)), "discrete"
        )
        rng = self._rng(8)
        data = jacobi_sequences(rng, 1, 21)
        traj = run_recursion(dt, data, 20)
        tj = transform_jacobi(traj)
        blocks = build_initial_jacobi(data)
        d_ok = (
            np.array_equal(tj.Ct, data.c)
            and np.array_equal(tj.Qt, data.q[:20])
            and np.array_equal(tj.at, blocks.a[:20])
            and np.array_equal(tj.bt, blocks.b[:20])
        )
        eb = eigen_blocks(traj, tj)
        psi = discrete_solution(eb, dt.a, [0.0, 1.0])
        d_ok &= not psi.any()
        if not d_ok:
            notes.append("discrete path differs")
        ok &= d_ok
        return [
            CheckResult(
                name="degenerate transform reproduces inputs",
                value=0.0 if ok else 1.0,
                tol=0.0,
                passed=ok,
                note="; ".join(notes) if notes else "bit-identical outputs",
            )
        ]

    def cli_determinism(self):
        import filecmp
        import tempfile
        from pathlib import Path

        from . import cli

        configs = cli.example_configs(seed=self.seed)
        mismatches = 0
        checked = 0
        with tempfile.TemporaryDirectory() as tmp:
            for name, cfg in configs.items():
                dir_a = Path(tmp) / f"{name}-a"
                dir_b = Path(tmp) / f"{name}-b"
                cli.run_config(dict(cfg), dir_a)
                cli.run_config(dict(cfg), dir_b)
                files_a = sorted(p.name for p in dir_a.iterdir())
                files_b = sorted(p.name for p in dir_b.iterdir())
                if files_a != files_b:
                    mismatches += 1
                    continue
                for fname in files_a:
                    checked += 1
                    if not filecmp.cmp(dir_a / fname, dir_b / fname, shallow=False):
                        mismatches += 1
        return [
            CheckResult(
                name="CLI byte-determinism",
                value=float(mismatches),
                tol=0.0,
                passed=mismatches == 0,
                note=f"{checked} files compared across repeated runs",
            )
        ]

    # -- driver --------------------------------------------------------

    def run(self, criteria=None):
        """Run the requested criteria (all by default, in order).

        Returns (results, elapsed_seconds); a criterion that raises is
        reported as a failed check rather than aborting the suite.
        """
        todo = sorted(criteria) if criteria else sorted(self.CRITERIA)
        results = []
        t0 = time.perf_counter()
        for num in todo:
            method = getattr(self, self.CRITERIA[num])
            try:
                out = method()
            except Exception as exc:  # surfaced in the report, not raised
                out = [
                    CheckResult(
                        name=f"criterion {num} ({self.CRITERIA[num]})",
                        value=float("nan"),
                        tol=0.0,
                        passed=False,
                        note=f"{type(exc).__name__}: {exc}",
                    )
                ]
            results.extend(
                replace(r, name=f"[{num}] {r.name}") for r in out
            )
        return results, time.perf_counter() - t0
