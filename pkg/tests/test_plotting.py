import math

import numpy as np

from lyapunov_bvp.floquet import MathieuTemplate, sweep
from lyapunov_bvp.plotting import discriminant_plot, field_plot, stability_chart


def test_chart_bytes_are_reproducible(tmp_path):
    sw = sweep(MathieuTemplate(2 * math.pi), np.linspace(0, 2, 8), np.linspace(0, 1, 6))
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    stability_chart(sw, path=a)
    stability_chart(sw, certified=sw.class_grid() == 0, path=b)
    stability_chart(sw, path=b)
    assert a.read_bytes() == b.read_bytes()
    assert not list(tmp_path.glob("*.part"))


def test_other_figures(tmp_path):
    lam = np.linspace(0, 10, 50)
    discriminant_plot(lam, 2 * np.cos(np.sqrt(lam)), [0.0], [2.47], path=tmp_path / "d.png")
    xy = np.random.default_rng(0).uniform(size=(60, 2))
    field_plot(xy, xy[:, 0] * xy[:, 1], title="f", path=tmp_path / "f.svg")
    field_plot(np.linspace(0, 1, 10), np.arange(10.0), path=tmp_path / "g.svg")
    assert all((tmp_path / n).stat().st_size > 0 for n in ("d.png", "f.svg", "g.svg"))
