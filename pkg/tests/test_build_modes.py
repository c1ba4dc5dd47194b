"""The dual, 32-only and 64-only builds, each exercised in a fresh interpreter."""
import ast
import os
import subprocess
import sys
import textwrap
from pathlib import Path

import pytest

from widemap.config import NO_32BIT_ENV, NO_64BIT_ENV

pytestmark = pytest.mark.width_agnostic

MODES = {"dual": {}, "32": {NO_64BIT_ENV: "1"}, "64": {NO_32BIT_ENV: "1"}}


def run_python(code, extra_env):
    env = {k: v for k, v in os.environ.items() if k not in (NO_32BIT_ENV, NO_64BIT_ENV)}
    env.update(extra_env)
    return subprocess.run([sys.executable, "-c", textwrap.dedent(code)], capture_output=True,
                          text=True, env=env, timeout=300)


@pytest.mark.parametrize("mode", sorted(MODES))
def test_import_and_mode_independent_code(mode):
    proc = run_python("""
        import numpy as np
        import widemap as wm
        print(wm.build_mode())
        dt = np.int32 if wm.HAVE_32BIT else np.int64
        m = wm.BlockMap.from_gids(-1, np.array([4, 9], dtype=dt), 0, wm.SerialComm())
        print(wm.my_gids_any_mode(m), m.gid64(1), m.max_all_gid64())
    """, MODES[mode])
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.split("\n")[:2] == [mode, "[4, 9] 9 9"]


def test_both_flags_fail_the_import():
    proc = run_python("import widemap", {NO_32BIT_ENV: "1", NO_64BIT_ENV: "1"})
    assert proc.returncode != 0 and "BuildConfigError" in proc.stderr


def test_32_only_surface():
    proc = run_python("""
        import numpy as np
        import widemap as wm
        from widemap.errors import BuildModeError
        S = wm.SerialComm()
        assert not hasattr(wm.BlockMap, "my_global_elements64")
        assert not hasattr(wm, "LongLongVector")
        assert hasattr(wm.BlockMap, "gid") and hasattr(wm.BlockMap, "gid64")
        for call in (lambda: wm.BlockMap.uniform(np.int64(4), 0, S),
                     lambda: wm.BlockMap.uniform(4, 0, S, width=64),
                     lambda: wm.GIDTypeVector[64],
                     lambda: wm.generate_crs_problem("laplace2d", 2, 2, 64, 0, S)):
            try:
                call()
            except BuildModeError:
                pass
            else:
                raise SystemExit("wide entry point reachable")
        print("ok")
    """, MODES["32"])
    assert proc.returncode == 0 and proc.stdout.strip() == "ok", proc.stderr


def test_64_only_surface_and_solver():
    proc = run_python("""
        import widemap as wm
        from widemap.errors import BuildModeError
        S = wm.SerialComm()
        for cls, name in ((wm.BlockMap, "gid"), (wm.BlockMap, "max_all_gid"), (wm.CrsMatrix, "num_global_rows"),
                          (wm.CrsGraph, "num_global_entries"), (wm.MultiVector, "global_length")):
            assert not hasattr(cls, name), name
        try:
            wm.BlockMap.uniform(4, 0, S)
        except BuildModeError:
            pass
        else:
            raise SystemExit("untyped map defaulted to 32-bit")
        p = wm.generate_crs_problem("laplace2d", 6, 6, 64, 3_000_000_000, S)
        rep = wm.cg_solve(p.matrix, p.b, p.x, 1e-10, 100, "jacobi")
        assert rep.converged, rep
        print("ok")
    """, MODES["64"])
    assert proc.returncode == 0 and proc.stdout.strip() == "ok", proc.stderr


def test_cli_default_width_follows_build(tmp_path):
    path = tmp_path / "m.mtx"
    proc = run_python(f"""
        import sys
        from widemap.cli import main
        assert main(["gallery", "--nx", "3", "--ny", "3", "--out", {str(path)!r}]) == 0
        sys.exit(main(["info", "--matrix", {str(path)!r}]))
    """, MODES["64"])
    assert proc.returncode == 0, proc.stderr
    assert "width=64" in proc.stdout


NARROW_NAMES = {
    "gid", "min_all_gid", "max_all_gid", "min_my_gid", "max_my_gid", "num_global_elements",
    "index_base", "num_global_points", "my_global_elements", "global_length", "num_global_rows",
    "num_global_cols", "num_global_nonzeros", "num_global_diagonals", "num_global_entries",
    "grid", "gcid",
}


def test_solver_calls_no_narrow_accessor():
    import widemap.solver
    tree = ast.parse(Path(widemap.solver.__file__).read_text())
    called = {node.func.attr for node in ast.walk(tree)
              if isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute)}
    assert not called & NARROW_NAMES
