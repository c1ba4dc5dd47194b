"""Distributed sparse linear algebra with selectable 32/64-bit global indices.

Global index width is chosen per map at run time; local indices stay 32-bit.
The set of width-specific entry points that exist is fixed at import time by
the build mode (see :mod:`widemap.config`).
"""
from . import config
from .block_map import BlockMap, Map
from .comm import Comm, CommKind, Op, SerialComm, SimulatedComm, run_ranks
from .config import HAVE_32BIT, HAVE_64BIT, build_mode
from .containers import (
    GIDTypeSerialDenseVector, GIDTypeVector, IntSerialDenseVector, IntVector,
)
from .crs_graph import CrsGraph, IndexData
from .crs_matrix import CrsMatrix, RowMatrix
from .distribution import (
    CommPlan, Direction, Directory, create_from_recvs, create_from_sends, execute_plan,
    get_directory_entries,
)
from .errors import (
    BuildModeError, CapacityError, ConsistencyError, ContractError, InvalidColumnError,
    LifecycleError, NotOwnedError, ParseError, RankAborted, UsageError, WidemapError,
    WidthError, WidthMixError, WidthRangeError, WidthStateError,
)
from .gallery import GalleryProblem, generate_crs_problem
from .matrix_io import count_entries, read_coordinate_file, write_coordinate_file
from .multivector import CombineMode, MultiVector, Status, Vector
from .solver import SolveReport, cg_solve
from .util import my_gids_any_mode, sort_with_companions
from .width import I32, I64, INVALID, GlobalIndexWidth

if HAVE_64BIT:
    from .containers import LongLongSerialDenseVector, LongLongVector

__version__ = "0.1.0"

__all__ = [
    "config", "BlockMap", "Map", "Comm", "CommKind", "Op", "SerialComm", "SimulatedComm", "run_ranks",
    "HAVE_32BIT", "HAVE_64BIT", "build_mode", "GIDTypeSerialDenseVector", "GIDTypeVector",
    "IntSerialDenseVector", "IntVector", "CrsGraph", "IndexData", "CrsMatrix", "RowMatrix",
    "CommPlan", "Direction", "Directory", "create_from_recvs", "create_from_sends",
    "execute_plan", "get_directory_entries", "BuildModeError", "CapacityError",
    "ConsistencyError", "ContractError", "InvalidColumnError", "LifecycleError",
    "NotOwnedError", "ParseError", "RankAborted", "UsageError", "WidemapError", "WidthError",
    "WidthMixError", "WidthRangeError", "WidthStateError", "GalleryProblem",
    "generate_crs_problem", "count_entries", "read_coordinate_file", "write_coordinate_file",
    "CombineMode", "MultiVector", "Status", "Vector", "SolveReport", "cg_solve",
    "my_gids_any_mode", "sort_with_companions", "I32", "I64", "INVALID", "GlobalIndexWidth",
    "__version__",
]

if HAVE_64BIT:
    __all__ += ["LongLongSerialDenseVector", "LongLongVector"]
