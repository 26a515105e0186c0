import importlib
import logging

import pytest

from symkernel.lattice import LatticeSpec
from symkernel.models import HYPERBOLOID, boost
from symkernel.rootdata import catalog_space


@pytest.fixture(autouse=True)
def reset_logging():
    """Undo whatever the command-line entry point did to the package logger"""
    yield
    logger = logging.getLogger("SYMKERNEL")
    for handler in logger.handlers:
        handler.close()
    logger.handlers = []
    logger.propagate = True
    logger.setLevel(logging.NOTSET)
    importlib.import_module("symkernel.main")._logging_configured = False


@pytest.fixture
def h2r():
    return catalog_space("H2R")


@pytest.fixture
def h3r():
    return catalog_space("H3R")


@pytest.fixture
def sl3r():
    return catalog_space("SL3R")


@pytest.fixture
def cyclic_spec():
    """Infinite cyclic group of translations of length 1 in H^2"""
    return LatticeSpec.from_matrices(HYPERBOLOID, [boost(2, 1, 1.0)], name="cyclic")


@pytest.fixture
def schottky_spec():
    """Free group on two long translations along orthogonal axes of H^2"""
    return LatticeSpec.from_matrices(
        HYPERBOLOID, [boost(2, 1, 6.0), boost(2, 2, 6.0)], name="schottky"
    )
