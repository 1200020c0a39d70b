import numpy as np
import pytest

from sympslice.normalspace import analyze_point, build_normal_space, point_splitting
from sympslice.systems import instantiate, list_systems


class GoldenCase:
    """One bundled golden point, fully analyzed."""

    def __init__(self, descriptor, golden, system):
        self.descriptor = descriptor
        self.golden = golden
        self.system = system
        self.x = np.asarray(golden.x, dtype=float)
        self.p = golden.covector(system)
        self.pd = analyze_point(system, self.x, self.p)
        self.splitting = point_splitting(self.pd)
        self.result = build_normal_space(self.pd, self.splitting)

    @property
    def key(self):
        return f"{self.descriptor.key}:{self.golden.name}"


@pytest.fixture(scope="session")
def golden_cases():
    cases = {}
    for desc in list_systems():
        system = instantiate(desc.key)
        for g in desc.golden_points:
            case = GoldenCase(desc, g, system)
            cases[case.key] = case
    return cases


@pytest.fixture(scope="session")
def so3_r3_tangential(golden_cases):
    return golden_cases["so3_r3:tangential_covector"]


@pytest.fixture(scope="session")
def two_body_generic(golden_cases):
    return golden_cases["so3_two_body:generic_two_body"]
