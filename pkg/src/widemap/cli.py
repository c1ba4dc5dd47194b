"""Command-line front end.

Every subcommand prints ``key=value`` lines on standard output.  Exit status
is 0 on success, 1 on a runtime failure (including a solve that does not
converge) and 2 on a usage error.
"""
import argparse
import sys


from . import config
from .comm import run_ranks
from .errors import WidemapError
from .gallery import KINDS, generate_crs_problem
from .matrix_io import read_coordinate_file, write_coordinate_file
from .multivector import MultiVector
from .solver import cg_solve


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _gallery(comm, args):
    prob = generate_crs_problem(args.kind, args.nx, args.ny, args.width, args.offset, comm)
    write_coordinate_file(prob.matrix, args.out)
    A = prob.matrix
    return {"rows": A.num_global_rows64(), "nnz": A.num_global_nonzeros64(), "out": args.out}


def _spmv(comm, args):
    _, A = read_coordinate_file(args.matrix, comm, args.width, args.offset)
    x = MultiVector(A.domain_map)
    x.put_scalar(1.0)
    y = MultiVector(A.range_map)
    A.multiply(False, x, y)
    return {
        "rows": A.num_global_rows64(),
        "nnz": A.num_global_nonzeros64(),
        "norm2": float(y.norm2()[0]),
    }


def _solve(comm, args):
    _, A = read_coordinate_file(args.matrix, comm, args.width, args.offset)
    ones = MultiVector(A.domain_map)
    ones.put_scalar(1.0)
    b = MultiVector(A.range_map)
    A.multiply(False, ones, b)
    x = MultiVector(A.domain_map)
    report = cg_solve(A, b, x, args.tol, args.max_iters, args.preconditioner)
    x.update(-1.0, ones, 1.0)
    return {
        "converged": report.converged,
        "iters": report.iterations,
        "residual": report.final_relative_residual,
        "error_max": float(x.norm_inf()[0]),
    }


def _info(comm, args):
    out = {
        "build_mode": config.build_mode(),
        "have_32bit": config.HAVE_32BIT,
        "have_64bit": config.HAVE_64BIT,
        "ranks": comm.size,
    }
    if args.matrix:
        row_map, A = read_coordinate_file(args.matrix, comm, args.width, args.offset)
        out.update({
            "width": row_map.width.bits,
            "rows": A.num_global_rows64(),
            "cols": A.num_global_cols64(),
            "nnz": A.num_global_nonzeros64(),
            "diagonals": A.num_global_diagonals64(),
            "min_all_gid": row_map.min_all_gid64(),
            "max_all_gid": row_map.max_all_gid64(),
            "bytes_per_packed_column_index": A.storage_stats()["bytes_per_packed_column_index"],
        })
    return out


def build_parser():
    default_width = 32 if config.HAVE_32BIT else 64
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--width", type=int, choices=(32, 64), default=default_width,
                        help="global index width (default %(default)s)")
    common.add_argument("--offset", type=int, default=0, help="GID offset added to every index")
    common.add_argument("--ranks", type=int, default=1, help="number of simulated ranks")

    parser = argparse.ArgumentParser(prog="widemap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gallery", parents=[common], help="generate a test matrix file")
    p.add_argument("--kind", choices=KINDS, default="laplace2d")
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ny", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_gallery)

    p = sub.add_parser("spmv", parents=[common], help="multiply a matrix file by ones")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=_spmv)

    p = sub.add_parser("solve", parents=[common], help="CG solve with b = A * ones")
    p.add_argument("--matrix", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--preconditioner", choices=("none", "jacobi"), default="none")
    p.set_defaults(func=_solve)

    p = sub.add_parser("info", parents=[common], help="build mode and matrix facts")
    p.add_argument("--matrix")
    p.set_defaults(func=_info)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if args.ranks < 1:
        parser.print_usage(sys.stderr)
        print("widemap: error: --ranks must be >= 1", file=sys.stderr)
        return 2
    try:
        results = run_ranks(args.ranks, args.func, args)
    except (WidemapError, OSError) as exc:
        print(f"widemap: error: {exc}", file=sys.stderr)
        return 1
    out = results[0]
    for key, value in out.items():
        print(f"{key}={_fmt(value)}")
    sys.stdout.flush()
    if out.get("converged") is False:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
