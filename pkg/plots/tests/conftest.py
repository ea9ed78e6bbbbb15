import shutil
import subprocess

import pytest

PRIMARY_CLI = shutil.which("chns")


def run_primary(config_text, outdir):
    """Drive the solver through its CLI; returns the output directory."""
    if PRIMARY_CLI is None:
        pytest.skip("primary 'chns' CLI not installed")
    cfg = outdir / "run.cfg"
    cfg.write_text(config_text)
    subprocess.run([PRIMARY_CLI, "run", str(cfg), "--outdir", str(outdir)],
                   check=True, capture_output=True, text=True)
    return outdir


@pytest.fixture(scope="session")
def test2_rundir(tmp_path_factory):
    """Short Test-2 run; the c field homogenizes toward 0.75."""
    out = tmp_path_factory.mktemp("test2run")
    return run_primary(
        "test = test2\nM = 32\nT_final = 0.3\n"
        "nu = 1e-3\nlam = 1e-4\neps = 1e-4\n", out)


@pytest.fixture(scope="session")
def conservation_rundir(tmp_path_factory):
    """Tight-tolerance run whose conservation errors stay near rounding."""
    out = tmp_path_factory.mktemp("consrun")
    return run_primary(
        "test = test3\nM = 16\nT_final = 0.02\nnu = 1e-3\nlam = 1e-4\n"
        "eps = 1e-4\nsolver_tol = 1e-12\nseed = 3\n", out)


@pytest.fixture(scope="session")
def backoff_rundir(tmp_path_factory):
    """Sharp-interface run that provokes CFL backoff events."""
    out = tmp_path_factory.mktemp("backoffrun")
    return run_primary(
        "test = test1\nM = 64\nT_final = 0.55\n"
        "nu = 1e-3\nlam = 1e-4\neps = 1e-5\n", out)
