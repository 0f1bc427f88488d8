"""Shared test helpers and the acceptance-criteria summary hook."""

import numpy as np

ACCEPTANCE_RESULTS = []


def record_criterion(num: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((num, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_RESULTS):
        word = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {word}  {detail}")


def oracle_rng(tag: int) -> np.random.Generator:
    """Deterministic generator for test-side draws, distinct from any
    stream the library derives (different key family)."""
    return np.random.Generator(
        np.random.Philox(key=np.array([0x7E57_0000 + tag, 0xFACE], dtype=np.uint64))
    )


def random_alpha(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal(2 * d)
    return (g[0::2] + 1j * g[1::2]) * np.sqrt(0.5)
