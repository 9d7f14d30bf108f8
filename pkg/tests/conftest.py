from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from mvocc.dataset import ModalityView, MultiViewDataset
from mvocc.synthetic import SynthSpec, gen_two_view


def make_dataset(n_pos: int, n_neg: int, dims=(3, 2), pos="MI", neg="non-MI", seed: int = 0) -> MultiViewDataset:
    rng = np.random.default_rng(seed)
    n = n_pos + n_neg
    views = tuple(ModalityView(v + 1, rng.normal(size=(d, n))) for v, d in enumerate(dims))
    labels = np.array([pos] * n_pos + [neg] * n_neg, dtype=object)
    ids = np.array([f"id{i:03d}" for i in range(n)], dtype=object)
    return MultiViewDataset(views, labels, ids, pos)


def write_csv(path: Path, header, rows) -> Path:
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")
    return path


@pytest.fixture(scope="session")
def synth_small() -> MultiViewDataset:
    return gen_two_view(SynthSpec(n_target=30, n_outlier=10, dims=(4, 4), separation=6.0, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria report one line each in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool | None, detail: str) -> None:
    status = "N/A " if ok is None else ("PASS" if ok else "FAIL")
    line = f"[criterion {criterion}] {status} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
