"""Conjugate gradients against the abstract row-matrix surface.

Only wide (``...64``) queries, ``apply`` and the diagonal are used, so the
solver runs unchanged on matrices of either index width and in every build
mode.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .multivector import MultiVector, check_maps_match


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    final_relative_residual: float


def _residual(A, b, x, r):
    A.apply(x, r)
    r.update(1.0, b, -1.0)


def cg_solve(A, b, x, tol=1e-8, max_iters=500, preconditioner=None):
    """Solve ``A x = b`` for symmetric positive definite ``A``; ``x`` holds the initial guess.

    Stops when ``||b - A x|| / ||b|| <= tol``.  When the recursively updated
    residual says so, the true residual is recomputed before accepting; if
    it disagrees, iteration restarts from the true residual.  The reported
    residual is always the recomputed one.
    """
    if not tol > 0:
        raise ContractError(f"tolerance must be positive, got {tol}")
    if max_iters < 0:
        raise ContractError(f"max_iters must be >= 0, got {max_iters}")
    precond = (preconditioner or "none").lower()
    if precond not in ("none", "jacobi"):
        raise ContractError(f"unknown preconditioner {preconditioner!r}")
    check_maps_match(A.operator_domain_map(), x.map, "cg_solve x")
    check_maps_match(A.operator_range_map(), b.map, "cg_solve b")
    if A.num_global_rows64() != A.num_global_cols64():
        raise ContractError("cg_solve needs a square matrix")
    if b.num_vectors != 1 or x.num_vectors != 1:
        raise ContractError("cg_solve takes a single right-hand side")

    inv_diag = None
    if precond == "jacobi":
        diag = MultiVector(A.row_matrix_row_map())
        A.extract_diagonal_copy(diag)
        zero = int(np.count_nonzero(diag.values == 0.0))
        if A.row_matrix_row_map().comm.sum_all([zero])[0]:
            raise ContractError("Jacobi preconditioner needs a nonzero diagonal")
        inv_diag = 1.0 / diag.values

    def precondition(r, z):
        if inv_diag is None:
            z.values[:] = r.values
        else:
            z.values[:] = inv_diag * r.values

    bnorm = b.norm2()[0]
    scale = bnorm if bnorm > 0.0 else 1.0
    r = MultiVector(b.map)
    z = MultiVector(b.map)
    p = MultiVector(x.map)
    Ap = MultiVector(b.map)

    _residual(A, b, x, r)
    rel = r.norm2()[0] / scale
    iterations = 0
    if rel > tol:
        precondition(r, z)
        p.values[:] = z.values
        rz = r.dot(z)[0]
        while iterations < max_iters:
            A.apply(p, Ap)
            pAp = p.dot(Ap)[0]
            if not pAp > 0.0:
                break
            alpha = rz / pAp
            x.update(alpha, p, 1.0)
            r.update(-alpha, Ap, 1.0)
            iterations += 1
            rel = r.norm2()[0] / scale
            if rel <= tol:
                _residual(A, b, x, r)
                if r.norm2()[0] / scale <= tol:
                    break
                precondition(r, z)
                p.values[:] = z.values
                rz = r.dot(z)[0]
                continue
            precondition(r, z)
            rz_new = r.dot(z)[0]
            p.update(1.0, z, rz_new / rz)
            rz = rz_new

    _residual(A, b, x, r)
    final = float(r.norm2()[0] / scale)
    return SolveReport(final <= tol * (1.0 + 1e-12), iterations, final)
