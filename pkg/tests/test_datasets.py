import math

import numpy as np
import pytest

from bernwass.datasets import (
    FAMILIES,
    Dataset,
    GeneratorSpec,
    clean_curve,
    generate,
    load_csv,
    save_csv,
)
from bernwass.errors import ConfigError, EmptyData, ParseError


def test_ellipse_start_point():
    ds = generate(GeneratorSpec("ellipse", n_points=10, noise_sigma=0.0))
    np.testing.assert_allclose(ds.ys[0], [1.0, 0.0], atol=1e-15)


def test_figure_eight_self_intersection():
    pts = clean_curve("figure_eight", [0.0, 0.5])
    np.testing.assert_allclose(pts, np.zeros((2, 2)), atol=1e-15)


@pytest.mark.parametrize("family", list(FAMILIES))
def test_deterministic(family):
    a = generate(GeneratorSpec(family, n_points=50, seed=9))
    b = generate(GeneratorSpec(family, n_points=50, seed=9))
    np.testing.assert_array_equal(a.ys, b.ys)
    c = generate(GeneratorSpec(family, n_points=50, seed=10))
    assert not np.array_equal(a.ys, c.ys)


@pytest.mark.parametrize(
    "family, expected",
    [
        ("spiral", lambda s: (0.2 + 0.8 * s) * np.array([math.cos(4 * math.pi * s), math.sin(4 * math.pi * s)])),
        ("ellipse", lambda s: np.array([math.cos(2 * math.pi * s), 0.5 * math.sin(2 * math.pi * s)])),
        ("figure_eight", lambda s: np.array([math.sin(2 * math.pi * s), math.sin(2 * math.pi * s) * math.cos(2 * math.pi * s)])),
        ("lissajous", lambda s: np.array([math.sin(6 * math.pi * s + math.pi / 2), math.sin(4 * math.pi * s)])),
        (
            "torus_knot",
            lambda s: np.array(
                [
                    (1 + 0.35 * math.cos(6 * math.pi * s)) * math.cos(4 * math.pi * s),
                    (1 + 0.35 * math.cos(6 * math.pi * s)) * math.sin(4 * math.pi * s),
                    0.35 * math.sin(6 * math.pi * s),
                ]
            ),
        ),
    ],
)
def test_noise_free_on_curve(family, expected):
    ds = generate(GeneratorSpec(family, n_points=37, noise_sigma=0.0))
    assert ds.dim == (3 if family == "torus_knot" else 2)
    np.testing.assert_allclose(ds.xs, np.linspace(0, 1, 37))
    assert np.all(np.diff(ds.xs) > 0)
    for x, y in zip(ds.xs, ds.ys):
        np.testing.assert_allclose(y, expected(x), atol=1e-12)


def test_noise_is_centered():
    n, sigma = 100_000, 0.5
    ds = generate(GeneratorSpec("torus_knot", n_points=n, noise_sigma=sigma, seed=3))
    noise = ds.ys - clean_curve("torus_knot", ds.xs)
    assert np.all(np.abs(noise.mean(axis=0)) < 4 * sigma / math.sqrt(n))
    np.testing.assert_allclose(noise.std(axis=0), sigma, rtol=0.02)


def test_unknown_family():
    with pytest.raises(ConfigError, match="valid families"):
        generate(GeneratorSpec("hypocycloid"))


def test_invalid_spec():
    with pytest.raises(ConfigError):
        generate(GeneratorSpec("ellipse", n_points=1))
    with pytest.raises(ConfigError):
        generate(GeneratorSpec("ellipse", noise_sigma=-0.1))


def test_family_params():
    ds = generate(GeneratorSpec("ellipse", n_points=5, noise_sigma=0.0, params={"a": 2.0, "b": 1.0}))
    np.testing.assert_allclose(ds.ys[0], [2.0, 0.0], atol=1e-15)


class TestCsv:
    def test_round_trip(self, tmp_path):
        ds = generate(GeneratorSpec("torus_knot", n_points=25, seed=2))
        path = tmp_path / "knot.csv"
        save_csv(ds, path)
        back = load_csv(path)
        np.testing.assert_array_equal(back.xs, ds.xs)
        np.testing.assert_array_equal(back.ys, ds.ys)
        assert back.name == "knot"
        assert path.read_text().splitlines()[0] == "x,y1,y2,y3"

    def test_wrong_column_count_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        lines = ["x,y1,y2"] + [f"{i},{i},{i}" for i in range(5)] + ["6,6", "7,7,7"]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as err:
            load_csv(path)
        assert err.value.line == 7

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y1,y2\n0,1,2\n1,abc,3\n")
        with pytest.raises(ParseError) as err:
            load_csv(path)
        assert err.value.line == 3

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0,1\n")
        with pytest.raises(ParseError):
            load_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(EmptyData):
            load_csv(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "head.csv"
        path.write_text("x,y1,y2\n")
        with pytest.raises(EmptyData):
            load_csv(path)


def test_dataset_shape_check():
    with pytest.raises(ConfigError):
        Dataset(np.zeros(3), np.zeros((4, 2)))
