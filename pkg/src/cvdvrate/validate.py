"""Quick oracle checks run by ``cvdvrate validate``."""

from __future__ import annotations

import time

import numpy as np

from . import fock
from . import gaussian as G
from .circuits import fidelity_phi_plus, purification_circuit, swap_circuit
from .compare import dv_output_eof, solve_f_required
from .dv_repeater import purify, swap_fidelity
from .rates import ParallelWait, Retry, Serial, Fixed, expected_time, monte_carlo_wait


def check_recurrences():
    worst = 0.0
    for f in np.linspace(0.25, 1.0, 50):
        worst = max(worst, abs(swap_fidelity(f) - fidelity_phi_plus(swap_circuit(f, f))))
        f_out, p = purify(f)
        f_c, p_c = purification_circuit(f)
        worst = max(worst, abs(f_out - f_c), abs(p - p_c))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def check_tmsv():
    s = fock.make_tmsv(0.5, 15)
    n = fock.photon_number(s, 0)
    return abs(n - 1 / 3) < 1e-3, f"chi=0.5 mean photons {n:.6f}"


def check_cross_oracle():
    s = fock.apply_loss(fock.make_tmsv(0.5, 30), 1, 0.5)
    _, cov = fock.quadrature_moments(s)
    ref = G.loss_map(G.tmsv_covariance(0.5), 1, 0.5).cov
    err = float(np.max(np.abs(cov - ref)))
    return err < 1e-6, f"lossy TMSV covariance error {err:.2e}"


def check_eof_anchor():
    e = dv_output_eof(0.5, 0.67)
    f = solve_f_required(0.5, 0.14)
    ok = abs(e - 0.14) <= 0.03 and abs(f - 0.67) <= 0.02
    return ok, f"EoF(F=0.67)={e:.4f}  F_req(0.14)={f:.4f}"


def check_waiting_times(trials=100_000, seed=0):
    node = Serial((Retry(ParallelWait(0.1, 2, 1.0), 0.5, 1.0), Fixed(2.0)))
    mean, err = monte_carlo_wait(node, trials, seed)
    exact = expected_time(node)
    return abs(mean - exact) <= 3 * err, f"analytic {exact:.4f} vs MC {mean:.4f} +- {err:.4f}"


CHECKS = {
    "recurrences": check_recurrences,
    "tmsv": check_tmsv,
    "gaussian-fock": check_cross_oracle,
    "eof-anchor": check_eof_anchor,
    "waiting-times": check_waiting_times,
}


def run_all(trials=100_000, seed=0, out=print) -> bool:
    ok_all = True
    for name, check in CHECKS.items():
        t0 = time.perf_counter()
        if name == "waiting-times":
            ok, msg = check(trials, seed)
        else:
            ok, msg = check()
        ok_all &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'} {name}: {msg} ({time.perf_counter() - t0:.2f} s)")
    return ok_all


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(0 if run_all() else 1)
