"""Reference values for the core crate's solver tests.

Solves min ||rho - D||_tr over diagonal D >= 0 (orthant) or diagonal
density matrices (simplex) as an SDP with cvxpy/Clarabel and writes the
states and optimal values to crates/core/tests/data/sdp_reference.txt.

    python3 python/generate_sdp_reference.py
"""

import pathlib

import cvxpy as cp
import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[1] / "crates/core/tests/data/sdp_reference.txt"


def ginibre(rng, n, k):
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def solve(rho, constraint):
    n = rho.shape[0]
    d = cp.Variable(n, nonneg=True)
    p = cp.Variable((n, n), hermitian=True)
    m = cp.Variable((n, n), hermitian=True)
    cons = [p >> 0, m >> 0, p - m == rho - cp.diag(d)]
    if constraint == "simplex":
        cons.append(cp.sum(d) == 1)
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(p) + cp.trace(m))), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    # Evaluate the objective exactly at the returned point.
    dv = np.maximum(d.value, 0.0)
    if constraint == "simplex":
        dv = dv / dv.sum()
    return np.abs(np.linalg.eigvalsh(rho - np.diag(dv))).sum()


def block(rho, constraint, value):
    lines = [f"constraint: {constraint}", f"value: {float(value)!r}", "kind: density", f"dim: {rho.shape[0]}"]
    for row in rho:
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines)


def main():
    rng = np.random.default_rng(20240611)
    cases = []
    for n, k in [(3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3), (5, 2), (5, 3), (6, 2), (6, 4)]:
        cases.append((ginibre(rng, n, k), "orthant"))
    for n, k in [(2, 2), (3, 2), (4, 1), (4, 4), (5, 2)]:
        cases.append((ginibre(rng, n, k), "simplex"))
    plus3 = np.full((3, 3), 1 / 3, dtype=complex)
    cases.append((plus3, "simplex"))
    cases.append((plus3, "orthant"))
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("\n---\n".join(block(r, c, solve(r, c)) for r, c in cases) + "\n")


if __name__ == "__main__":
    main()
