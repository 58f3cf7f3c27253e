"""
This package contains tools for simulating, estimating and testing redundant
systems with warm stand-by units
"""

from __future__ import absolute_import
import os
from pathlib import Path
import pytest

# version
pkg_root_dir = Path(__file__).parent
with open(os.path.join(pkg_root_dir, "VERSION")) as version_file:
    __version__ = version_file.read().strip()

from .stepfn import StepFn, ecdf
from .distributions import Exponential, Weibull
from .model import GeneralSedyakin, ScaleAFT, StandbyModel, SystemConfig
from .estimation import HotSample, WarmSample, estimate_all
from .gof import GofData, run_test
from .montecarlo import McConfig, mc_power, mc_significance


# testing suite
def test():
    """
    run pytest tests
    """
    retcode = pytest.main([str(pkg_root_dir)])
    return retcode
