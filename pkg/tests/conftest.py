import pytest

N_CRITERIA = 10
_RESULTS = pytest.StashKey[dict]()


class AcceptanceLog:
    """Collects sub-check outcomes per acceptance criterion."""

    def __init__(self, store: dict):
        self.store = store

    def check(self, n: int, name: str, ok, detail: str = "") -> bool:
        self.store.setdefault(n, []).append((name, bool(ok), detail))
        return bool(ok)


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.fixture(scope="session")
def acceptance(request):
    return AcceptanceLog(request.config.stash[_RESULTS])


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        checks = results.get(n)
        if not checks:
            terminalreporter.write_line(f"criterion {n:2d}: NOT RUN")
            continue
        verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        parts = "; ".join(f"{name} {'ok' if ok else 'FAILED'}{' ' + d if d else ''}" for name, ok, d in checks)
        terminalreporter.write_line(f"criterion {n:2d}: {verdict} ({parts})")
