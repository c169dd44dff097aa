"""Fixture CSVs produced through the primary package's CLI (subprocess),
which is the only interface this package consumes."""

import subprocess
import sys

import pytest


def run_sweep(out_path, *args):
    cmd = [sys.executable, "-m", "spinalcodes.cli", "sweep",
           "--out", str(out_path), "--format", "csv", *args]
    subprocess.run(cmd, check=True, capture_output=True, text=True)
    return out_path


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("sweeps")


@pytest.fixture(scope="session")
def floor_sweep_csv(csv_dir):
    """Criterion-3 shaped data: (n=8, k=4, c=8, L=1) AWGN on the floor."""
    return run_sweep(
        csv_dir / "floor_sweep.csv",
        "--n", "8", "--k", "4", "--c", "8", "--L", "1",
        "--channel", "awgn", "--snr-grid", "40,50,60",
        "--trials", "2000", "--target-errors", "0", "--seed", "99",
    )


@pytest.fixture(scope="session")
def bound_sweep_csv(csv_dir):
    """Criterion-4 shaped data: (n=12, k=4, c=4, L=2) AWGN waterfall."""
    return run_sweep(
        csv_dir / "bound_sweep.csv",
        "--n", "12", "--k", "4", "--c", "4", "--L", "2",
        "--channel", "awgn", "--snr-grid", "5,10,15",
        "--trials", "300", "--target-errors", "0", "--seed", "7",
    )


@pytest.fixture(scope="session")
def zero_error_csv(csv_dir):
    """A low-floor code whose high-SNR rows record zero errors."""
    return run_sweep(
        csv_dir / "zero_error.csv",
        "--n", "8", "--k", "4", "--c", "8", "--L", "4",
        "--channel", "awgn", "--snr-grid", "30,40,50",
        "--trials", "400", "--target-errors", "0", "--seed", "3",
    )
