import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


def record_acceptance(crit, passed, detail):
    ACCEPTANCE[crit] = (bool(passed), detail)
    line = f"ACCEPTANCE {crit}: {'PASS' if passed else 'FAIL'} | {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: int(c.split()[0])):
        ok, detail = ACCEPTANCE[crit]
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'} | {detail}")


@pytest.fixture(scope="session")
def ot64():
    """64x64 optimal-transport maps for p = 2 and p = 3 (built once, timed)."""
    from hmono import CostFunction, Density, make_generator_map

    maps, seconds = {}, {}
    for p in (2.0, 3.0):
        t0 = time.perf_counter()
        cost = CostFunction.isotropic(2, p)
        maps[p] = make_generator_map("ot_grid", cost, ((0.0, 0.0), (1.0, 1.0), (64, 64)),
                                     density=Density("gaussian"), seed=0, max_points=4096,
                                     pair_budget=1_000_000)
        seconds[p] = time.perf_counter() - t0
    return maps, seconds
