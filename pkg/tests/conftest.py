"""Shared fixtures: synthetic light fields and acceptance-line reporting."""

import numpy as np
import pytest

from lflc.layers import LayerStack, render_additive
from lflc.lightfield import LightField

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per criterion, then enforce it."""

    def record(criterion: int, passed: bool, detail: str):
        line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def centered_depths(layer_count: int) -> tuple[int, ...]:
    return tuple(range(-(layer_count // 2), layer_count - layer_count // 2))


def random_truth_field(
    rng,
    layer_count: int = 3,
    channels: int = 1,
    height: int = 32,
    width: int = 32,
    views: tuple[int, int] = (5, 5),
    depths=None,
):
    """A light field rendered from a random ground-truth layer stack.

    Targets built this way are exactly representable by the additive model,
    which makes solver-quality assertions meaningful.
    """
    depths = tuple(depths) if depths is not None else centered_depths(layer_count)
    images = rng.uniform(0.0, 1.0 / layer_count, size=(layer_count, channels, height, width))
    truth = LayerStack(depths, images)
    samples, mask = render_additive(truth, views)
    return LightField(samples=np.clip(samples, 0.0, 1.0)), mask, truth
