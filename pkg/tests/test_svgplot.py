import numpy as np

from qaction.svgplot import line_svg, scatter_svg


def test_scatter_writes_valid_svg(tmp_path):
    path = tmp_path / "s.svg"
    rng = np.random.default_rng(0)
    scatter_svg(path, [{"x": rng.normal(size=50), "y": rng.normal(size=50),
                        "label": "pts"}],
                title="demo", xlabel="x", ylabel="px")
    text = path.read_text()
    assert text.startswith("<svg")
    assert text.rstrip().endswith("</svg>")
    assert "circle" in text and "demo" in text


def test_line_writes_valid_svg(tmp_path):
    path = tmp_path / "l.svg"
    x = np.linspace(0, 4, 9)
    line_svg(path, [{"x": x, "y": np.tanh(x), "label": "kink"}],
             title="profile", xlabel="t", ylabel="x")
    text = path.read_text()
    assert "polyline" in text and "kink" in text


def test_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    x = np.linspace(-1, 1, 21)
    for path in (a, b):
        scatter_svg(path, [{"x": x, "y": x**2}], title="t")
    assert a.read_bytes() == b.read_bytes()
