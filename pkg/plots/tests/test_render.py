import subprocess

import numpy as np
import pytest

from chnsplots.render import RenderError, render_field, render_snapshot, render_timeseries
from chnsplots.snapshot_io import read_snapshot
from test_snapshot_io import synthetic


class TestRenderSnapshot:
    def test_three_panel_figure(self, tmp_path):
        snap = synthetic()
        out = tmp_path / "panels.png"
        ranges = render_snapshot(snap, out)
        assert out.exists() and out.stat().st_size > 0
        assert set(ranges) == {"rho", "|v|", "c"}

    def test_1d_snapshot_renders(self, tmp_path):
        snap = synthetic(dim=1)
        out = tmp_path / "line.png"
        ranges = render_snapshot(snap, out)
        assert out.exists()
        assert set(ranges) == {"rho", "v", "c"}

    def test_test2_final_concentration_nearly_uniform(self, test2_rundir,
                                                      tmp_path):
        paths = sorted(test2_rundir.glob("snap_*.chns"))
        final = max(paths, key=lambda p: read_snapshot(p).t)
        snap = read_snapshot(final)
        out = tmp_path / "test2.png"
        ranges = render_snapshot(snap, out)
        lo, hi = ranges["c"]
        assert out.exists()
        assert hi - lo < 0.05, f"c range width {hi - lo:.3f}"
        assert abs(0.75 - 0.5 * (lo + hi)) < 0.02

    def test_synthetic_extrema_at_corners(self, tmp_path):
        # c = cos(pi x) cos(pi y) peaks at the (0,0) and (1,1) corners;
        # the brightest pixel of the rendered field must sit in a corner
        M = 64
        x = (np.arange(M) + 0.5) / M
        c = np.cos(np.pi * x)[:, None] * np.cos(np.pi * x)[None, :]
        out = tmp_path / "field.png"
        render_field(c, out)
        import matplotlib.image as mpimg
        img = mpimg.imread(out)
        lum = img[..., :3].sum(axis=2)
        # search inside the axes region only (clip colorbar and margins)
        H, W = lum.shape
        core = lum[int(0.2 * H):int(0.8 * H), int(0.15 * W):int(0.7 * W)]
        iy, ix = np.unravel_index(np.argmax(core), core.shape)
        ny, nx = core.shape
        in_corner_y = iy < 0.25 * ny or iy > 0.75 * ny
        in_corner_x = ix < 0.25 * nx or ix > 0.75 * nx
        assert in_corner_y and in_corner_x

    def test_cli_reports_bad_file(self, tmp_path):
        bad = tmp_path / "bad.chns"
        bad.write_bytes(b"JUNKJUNK" + bytes(64))
        proc = subprocess.run(
            ["render-snapshot", str(bad), "--out", str(tmp_path / "x.png")],
            capture_output=True, text=True)
        assert proc.returncode != 0
        assert "magic" in proc.stderr

    def test_cli_renders_valid_file(self, test2_rundir, tmp_path):
        snap = sorted(test2_rundir.glob("snap_*.chns"))[0]
        out = tmp_path / "cli.png"
        proc = subprocess.run(
            ["render-snapshot", str(snap), "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert out.exists()


class TestRenderTimeseries:
    def test_conservation_columns_small(self, conservation_rundir, tmp_path):
        csv = conservation_rundir / "diagnostics.csv"
        out = tmp_path / "cons.png"
        cols = render_timeseries(csv, ["err_rho", "err_q"], out)
        assert out.exists()
        assert np.max(np.abs(cols["err_rho"])) < 1e-9
        assert np.max(np.abs(cols["err_q"])) < 1e-9

    def test_cfl_backoff_visible(self, backoff_rundir, tmp_path):
        csv = backoff_rundir / "diagnostics.csv"
        out = tmp_path / "cfl.png"
        cols = render_timeseries(csv, ["cfl"], out)
        assert np.any(np.diff(cols["cfl"]) < 0), "no CFL backoff event"

    def test_missing_column_lists_available(self, conservation_rundir,
                                            tmp_path):
        csv = conservation_rundir / "diagnostics.csv"
        with pytest.raises(RenderError, match="available"):
            render_timeseries(csv, ["vorticity"], tmp_path / "x.png")

    def test_empty_csv_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(RenderError, match="empty"):
            render_timeseries(empty, ["t"], tmp_path / "x.png")
        header_only = tmp_path / "header.csv"
        header_only.write_text("t,dt\n")
        with pytest.raises(RenderError, match="no data"):
            render_timeseries(header_only, ["dt"], tmp_path / "y.png")

    def test_cli_series(self, conservation_rundir, tmp_path):
        out = tmp_path / "series.png"
        proc = subprocess.run(
            ["render-series", str(conservation_rundir / "diagnostics.csv"),
             "--cols", "cmin,cmax", "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert out.exists()
