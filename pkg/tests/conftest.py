import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import gradlearn.regression as regression
from gradlearn.data import Dataset
from gradlearn.kernels import KernelSpec, WeightSpec, default_bandwidths

settings.register_profile(
    "default",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

STATIONARITY_TOL = 1e-8

_ORIGINALS = {
    "fit_gradient_regression": regression.fit_gradient_regression,
    "dense_oracle_fit": regression.dense_oracle_fit,
}
_checked = {"models": 0, "worst": 0.0}
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, title: str, ok: bool, detail: str, echo: bool = True) -> bool:
    """Register a one-line acceptance verdict for the terminal summary."""
    ACCEPTANCE_LINES[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title}: {detail}"
    if echo:
        print(ACCEPTANCE_LINES[number])
    return ok


def stationarity_stats() -> dict:
    return dict(_checked)


def _checking(fn):
    def wrapper(data, *args, **kwargs):
        model = fn(data, *args, **kwargs)
        res = regression.stationarity_residual(model, data.y)
        _checked["models"] += 1
        _checked["worst"] = max(_checked["worst"], res)
        assert res < STATIONARITY_TOL, f"stationarity residual {res:.3e} from {fn.__name__}"
        return model

    wrapper.__wrapped__ = fn
    return wrapper


@pytest.fixture(autouse=True)
def _stationarity_guard(monkeypatch):
    """Every regression model fitted during a test must satisfy the
    stationarity system, wherever the fit is called from."""
    for mod in list(sys.modules.values()):
        if mod is None or not getattr(mod, "__name__", "").startswith(("gradlearn", "test")):
            continue
        for name, orig in _ORIGINALS.items():
            if getattr(mod, name, None) is orig:
                monkeypatch.setattr(mod, name, _checking(orig))
    yield


def pytest_terminal_summary(terminalreporter):
    if 2 in ACCEPTANCE_LINES and ACCEPTANCE_LINES[2].startswith("[PASS]"):
        # criterion 2 covers every regression fit in the session, not just its own battery
        record_criterion(
            2, "stationarity residual", _checked["worst"] < STATIONARITY_TOL,
            f"{_checked['models']} fits across the whole run, worst {_checked['worst']:.2e} (< 1e-8)",
            echo=False,
        )
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
    if _checked["models"]:
        terminalreporter.write_line(
            f"stationarity guard: {_checked['models']} regression fits checked, "
            f"worst residual {_checked['worst']:.2e} (< {STATIONARITY_TOL:g})"
        )


def random_instance(rng, n, p, response="random"):
    X = rng.normal(size=(n, p))
    if response == "random":
        y = rng.normal(size=n)
    elif response == "labels":
        y = np.where(rng.uniform(size=n) < 0.5, -1.0, 1.0)
        if np.all(y == y[0]):
            y[0] = -y[0]
    else:
        raise ValueError(response)
    return Dataset(X, y)


def heuristic_specs(X):
    s, sigma = default_bandwidths(X)
    return KernelSpec(sigma), WeightSpec(s)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
