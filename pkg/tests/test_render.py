import json

import numpy as np
import pytest
from PIL import Image

from chebdyn.dynamics import AttractorSet, iterate
from chebdyn.chebyshev import build_chebyshev
from chebdyn.lambda_family import p_lambda
from chebdyn.poly import Polynomial
from chebdyn.render import (
    EXTRANEOUS_COLOUR,
    SENTINEL_COLOURS,
    UNDECIDED,
    BasinGrid,
    Viewport,
    default_palette,
    encode_image,
    render_basins,
    rotation_check,
    sha256,
    shade_levels,
    symmetry_check,
    to_rgb,
    write_sidecar,
)

Z3 = Polynomial([-1, 0, 0, 1])
DOUBLE = Polynomial.from_roots([(1, 2), (-2, 1)])


class TestViewport:
    def test_pixel_centres(self):
        vp = Viewport(0j, 4.0, 4, 2)
        c = vp.pixel_centers()
        assert c.shape == (2, 4)
        assert c[0, 0] == complex(-1.5, 0.5) and c[1, 3] == complex(1.5, -0.5)
        assert vp.height == 2.0

    def test_aspect(self):
        vp = Viewport(1 + 1j, 3.0, 300, 200)
        c = vp.pixel_centers()
        assert np.isclose(c[0, 1].real - c[0, 0].real, c[0, 0].imag - c[1, 0].imag)

    def test_rejects_bad(self):
        with pytest.raises(ValueError):
            Viewport(0j, 0.0, 10, 10)
        with pytest.raises(ValueError):
            Viewport(0j, 1.0, 0, 10)


class TestRender:
    def test_pixels_match_iterate(self):
        vp = Viewport(0j, 6.0, 9, 7)
        grid = render_basins(Z3, vp)
        R, A = build_chebyshev(Z3), AttractorSet.for_polynomial(Z3)
        for (i, j), z in np.ndenumerate(vp.pixel_centers()):
            tr = iterate(R, z, A)
            expected = tr.attractor if tr.attractor is not None else grid.ids[i, j]
            assert grid.ids[i, j] == expected and grid.iterations[i, j] == tr.iterations_used

    def test_every_pixel_assigned(self):
        grid = render_basins(p_lambda(0.0), Viewport(0j, 8.0, 40, 30))
        assert grid.ids.shape == (30, 40) and grid.iterations.shape == (30, 40)
        valid = set(range(len(grid.attractors))) | {-1, -2, -3}
        assert set(np.unique(grid.ids).tolist()) <= valid

    @pytest.mark.parametrize("lam", [-1.0, 0.0, 1.0])
    def test_worker_independence(self, lam, tmp_path):
        vp = Viewport(0j, 8.0, 150, 150)
        paths = []
        for w in (1, 4, 16):
            grid = render_basins(p_lambda(lam), vp, workers=w, tile=32)
            paths.append(encode_image(grid, tmp_path / f"w{w}.png"))
        digests = {sha256(p) for p in paths}
        assert len(digests) == 1

    def test_four_colours_lambda_zero(self):
        grid = render_basins(p_lambda(0.0), Viewport(0j, 8.0, 80, 80))
        ids = set(np.unique(grid.ids).tolist())
        assert set(range(4)) <= ids


class TestEncoding:
    def test_palette_roles(self):
        A = AttractorSet.for_polynomial(p_lambda(0.5))
        pal = default_palette(A)
        extra = [a.id for a in A if a.extraneous]
        assert pal[extra[0]] == EXTRANEOUS_COLOUR
        assert len({pal[a.id] for a in A}) == 4
        for k, v in SENTINEL_COLOURS.items():
            assert pal[k] == v

    def test_colour_budget(self, tmp_path):
        grid = render_basins(p_lambda(0.5), Viewport(0j, 8.0, 60, 60))
        path = encode_image(grid, tmp_path / "a.png", shades=8)
        img = np.asarray(Image.open(path))
        assert img.dtype == np.uint8 and img.shape == (60, 60, 3)
        colours = {tuple(c) for c in img.reshape(-1, 3)}
        assert len(colours) <= 4 * 8 + len(SENTINEL_COLOURS)

    def test_one_pixel(self, tmp_path):
        grid = render_basins(Z3, Viewport(0j, 1.0, 1, 1))
        path = encode_image(grid, tmp_path / "one.png")
        assert Image.open(path).size == (1, 1)

    def test_lossless_roundtrip(self, tmp_path):
        grid = render_basins(DOUBLE, Viewport(-0.5, 6.0, 30, 20))
        path = encode_image(grid, tmp_path / "d.png")
        assert np.array_equal(np.asarray(Image.open(path)), to_rgb(grid))

    def test_missing_palette_entry(self):
        grid = render_basins(Z3, Viewport(0j, 4.0, 5, 5))
        with pytest.raises(ValueError):
            to_rgb(grid, palette={0: (1, 2, 3)})

    def test_shading_log_scale(self):
        levels = shade_levels(np.array([0, 1, 10, 100, 2000, 5000]), 2000, 8)
        assert levels[0] == 0 and levels[-1] == levels[-2] == 7
        assert all(a <= b for a, b in zip(levels, levels[1:]))

    def test_sidecar(self, tmp_path):
        grid = render_basins(Z3, Viewport(0j, 4.0, 8, 8))
        path = encode_image(grid, tmp_path / "z.png")
        data = json.loads(write_sidecar(grid, path).read_text())
        assert data["sha256"] == sha256(path) and data["viewport"]["pixels_x"] == 8
        assert set(data["legend"]) >= {"0", "1", "2", str(UNDECIDED)}


class TestSymmetry:
    @pytest.mark.parametrize("p", [p_lambda(0.0), DOUBLE, p_lambda(-1.0)])
    def test_real_axis(self, p):
        grid = render_basins(p, Viewport(0j, 8.0, 100, 100))
        rep = symmetry_check(grid)
        assert rep["verdict"] == "PASS" and rep["agreement"] >= 0.995

    def test_rejects_asymmetric(self):
        grid = render_basins(p_lambda(0.0), Viewport(0.5j, 4.0, 10, 10))
        with pytest.raises(ValueError):
            symmetry_check(grid)

    def test_rotation_z3(self):
        grid = render_basins(Z3, Viewport(0j, 6.0, 100, 100))
        rep = rotation_check(Z3, grid)
        assert rep["verdict"] == "PASS" and rep["agreement"] >= 0.995

    def test_rotation_detects_mismatch(self):
        # p_lambda has no 3-fold symmetry, so its attractors are not rotation invariant
        grid = render_basins(p_lambda(0.0), Viewport(0j, 6.0, 10, 10))
        with pytest.raises(ValueError):
            rotation_check(p_lambda(0.0), grid)

    def test_grid_is_dataclass(self):
        grid = render_basins(Z3, Viewport(0j, 2.0, 3, 3))
        assert isinstance(grid, BasinGrid) and grid.counts()
