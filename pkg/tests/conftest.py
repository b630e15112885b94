import functools

from bernstein_dg.problems import FVOracleConfig, fv_reference, make_problem

# criterion number -> (passed, detail), filled by the acceptance suite
ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def cached_oracle(pid: str, t: float, cells: int = 20000):
    """Finite-volume reference, computed once per session."""
    return fv_reference(make_problem(pid), t, FVOracleConfig(cells=cells))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
