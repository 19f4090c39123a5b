"""Shared fixtures and frozen reference values.

The ORACLE dict holds independently computed numbers (40-digit arithmetic on
closed-form survival/density expressions, high-resolution quadrature, exact
root finds).  They were produced outside the package and are frozen here so
the tests cannot drift along with the implementation.
"""
import numpy as np
import pytest

from ruincone.configs import (
    reference_exponential,
    reference_lognormal,
    reference_pareto,
    reference_weibull,
    two_cone_reference,
)
from ruincone.geometry import AngularSet, DiamondCap
from ruincone.model import AngularMixture, IncrementModel, WeightFn


# frozen high-precision reference values; see module docstring
ORACLE = {
    # E[R w(R)] and ||c||_1 for the four single-cap reference models
    "drift": {
        "weibull": {
            "E_Rw": 0.164264392198838084928941533961,
            "component": 0.835735607801161915071058466039,
            "norm_c": 1.67147121560232383014211693208,
            "mean": 2.0,
        },
        "lognormal": {
            "E_Rw": 0.476971953942598304137688697741,
            "component": 0.347388681407465769286636696166,
            "norm_c": 0.694777362814931538573273392333,
            "mean": 1.64872127070012814684865078781,
        },
        "pareto": {
            "E_Rw": 0.272005097937364716431695759038,
            "component": 0.477994902062635283568304240962,
            "norm_c": 0.955989804125270567136608481923,
            "mean": 1.5,
        },
        "exponential": {
            "E_Rw": 0.185896912223955956833090083482,
            "component": 0.314103087776044043166909916518,
            "norm_c": 0.628206175552088086333819833035,
            "mean": 1.0,
        },
    },
    # integral of the survival function over [u, inf)
    "integrated_tail": {
        "weibull_4": 0.8120116994196761513639969698349064204458,
        "lognormal_5": 0.1781949894751790373076337574909291860814,
        "pareto3_10": 0.005,
        "exponential_3": 0.0497870683678639429793424156500617766317,
    },
    "lognormal_FI": {
        2.0: 0.534851121535892846426695858727,
        5.0: 0.178194989475179037307633757491,
        10.0: 0.0523568615524226553908066506736,
        20.0: 0.0105114776237316024918004278882,
        50.0: 0.000672092845016740792801713103916,
    },
    "lognormal_survival": {1e6: 1.02746053902042208722321165861e-43,
                           1e10: 1.28417563064352971244082171209e-117},
    # two-fold convolution tail over the plain tail
    "conv_weibull": {
        10.0: 2.386662793520080670299708,
        31.6227766016837933: 2.460103005358230514455135,
        100.0: 2.306092328731062087874146,
        316.22776601683793: 2.144677243152118755367112,
        1000.0: 2.070885692732348666810369,
    },
    "conv_pareto15_1000": 2.008988745622044552730706,
    "conv_lognormal": {100.0: 2.185426447398495327515389,
                       1000.0: 2.023665028532371930284438},
    # integrated-tail ratio FI(gamma*u)/FI(u)
    "a2_weibull": {
        (1.5, 10.0): 0.5751860193137075789203279,
        (1.5, 100.0): 0.1272579687509118387217838,
        (1.5, 1000.0): 0.0009977925235542245579222397,
        (2.0, 10.0): 0.3547820193332509175950252,
        (2.0, 100.0): 0.02187196498084173157895494,
        (2.0, 1000.0): 2.870489209149827342132192e-06,
    },
    "a2_lognormal_g2": {10.0: 0.2007659991844032840349967,
                        100.0: 0.0489247652560215765121518,
                        1000.0: 0.01078464300303536990058549},
    # first-passage integral of the weibull reference model (exact ||c||)
    "halfspace_weibull": {
        5.0: 0.06252126218000839839843063,
        10.0: 0.04151890103263680280278883,
        20.0: 0.02003741952530998397660984,
        30.0: 0.01048713076464229263497057,
        100.0: 0.0003256701827264984998770001,
    },
    "equivalence_gap_weibull": {10.0: -0.80305568636875612922,
                                30.0: -0.67635760153114286883,
                                100.0: -0.45499681782137045932},
    # roots of FI(u)/||c|| = target for the weibull reference, exact drift
    "u_grid_ratio": (46.84601628638217547530323, 66.41627055941465252786704,
                     88.96421506784903722693868, 114.4450676508428190582998,
                     142.8252704250003483682502),
    "u_grid_two_cone": (16.92509771136253894926659, 46.84601628638217547530323,
                        88.96421506784903722693868, 142.8252704250003483682502),
    # overshoot-proxy law of the weibull reference: atom and convolution spots
    "halfspace_law_atom_mass": 0.9017246658718890894759432,
    "conv_halfspace_weibull": {31.6227766016837933: 2.09569993093917,
                               100.0: 2.19291535474058},
}


@pytest.fixture(scope="session")
def weibull_model():
    return reference_weibull()


@pytest.fixture(scope="session")
def lognormal_model():
    return reference_lognormal()


@pytest.fixture(scope="session")
def pareto_model():
    return reference_pareto()


@pytest.fixture(scope="session")
def exponential_model():
    return reference_exponential()


@pytest.fixture(scope="session")
def two_cone_setup():
    return two_cone_reference()


def single_cap_model(radial, weight, *, certify=True, center=(0.5, 0.5),
                     radius=0.05, off=(-0.5, -0.5)):
    """Single-cap mixture helper for ad-hoc models in tests."""
    core = AngularSet(caps=(DiamondCap(center=center, radius=radius),))
    ang = AngularMixture(core=core, cap_masses=(1.0,),
                         off_direction=np.asarray(off, dtype=float),
                         weight=weight)
    return IncrementModel.build(radial, ang, certify=certify)


def const_weight(v):
    return WeightFn("const", value=v)


def rational_weight(kappa):
    return WeightFn("rational", kappa=kappa)
