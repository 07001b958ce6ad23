import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pwsim import theory

# frozen from tests/oracles/compute_k0_reference.py (mpmath, 50 digits)
K0_REFERENCE = {
    0.05: 3.1142340294719898,
    0.1: 2.4270690247020166,
    0.3: 1.3724600605442974,
    0.5: 0.92441907122766586,
    1.0: 0.42102443824070833,
    1.9: 0.12884597927604749,
    2.0: 0.11389387274953344,
    2.1: 0.10078374088996693,
    3.0: 0.034739504386279248,
    5.0: 0.0036910983340425943,
    8.0: 0.00014647070522281539,
    12.0: 2.2008253973114914e-6,
    20.0: 5.7412378153365243e-10,
    40.0: 8.392861100099567e-19,
}


def test_k0_against_reference_table():
    for x, ref in K0_REFERENCE.items():
        assert theory.bessel_k0(x) == pytest.approx(ref, rel=1e-9)


def test_k0_vectorized_and_rejects_nonpositive():
    xs = np.array(sorted(K0_REFERENCE))
    vals = theory.bessel_k0(xs)
    assert vals.shape == xs.shape
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(ValueError):
        theory.bessel_k0(0.0)
    with pytest.raises(ValueError):
        theory.bessel_k0(-1.0)


def test_static_profile_value_and_decay():
    b = 53.3
    assert theory.static_profile_2d(1.0, b) == pytest.approx(
        b * 0.42102443824070833 / (2 * math.pi), rel=1e-9
    )
    # far field falls like exp(-m r)/sqrt(r): log-derivative -> -m - 1/(2r)
    r = 18.0
    h = 1e-4
    ld = (
        math.log(theory.static_profile_2d(r + h, b) / theory.static_profile_2d(r - h, b))
    ) / (2 * h)
    assert ld == pytest.approx(-1.0 - 1.0 / (2 * r), abs=2e-3)
    with pytest.raises(ValueError):
        theory.static_profile_2d(0.0, b)


def test_yukawa_packet_static_value():
    b = 7.0
    val = theory.yukawa_packet_3d(np.array([1.0, 0.0, 0.0]), 0.0, 0.0, b)
    assert val == pytest.approx(b * math.exp(-1.0) / (4 * math.pi), rel=1e-12)


def test_yukawa_packet_contraction():
    # u = 0.6 contracts in-line level sets by gamma = 1.25
    b, u, a = 7.0, 0.6, 1.7
    gam = 1.25
    moving = theory.yukawa_packet_3d(np.array([a / gam, 0.0, 0.0]), 0.0, u, b)
    static = theory.yukawa_packet_3d(np.array([a, 0.0, 0.0]), 0.0, 0.0, b)
    assert moving == pytest.approx(static, rel=1e-12)


def test_yukawa_packet_singular_and_superluminal():
    with pytest.raises(ValueError):
        theory.yukawa_packet_3d(np.array([0.0, 0.0, 0.0]), 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        theory.yukawa_packet_3d(np.array([1.0, 0.0, 0.0]), 0.0, 1.0, 1.0)


def test_yukawa_solves_field_equation_pointwise():
    # (-lap + m^2) phi = 0 away from the source, via a 6-point 3D stencil
    b = 3.0
    h = 1e-3
    p = np.array([2 * math.pi, 1.0, -0.5])

    def phi(q):
        return theory.yukawa_packet_3d(q, 0.0, 0.0, b)

    lap = 0.0
    for ax in range(3):
        e = np.zeros(3)
        e[ax] = h
        lap += (phi(p + e) - 2 * phi(p) + phi(p - e)) / h**2
    assert abs(-lap + phi(p)) < 1e-6 * abs(phi(p))


def test_green_function_causality_and_limits():
    assert theory.green_function([1.0, 0.0, 0.0], -0.5).regular == 0.0
    assert theory.green_function([2.0, 0.0, 0.0], 1.0).regular == 0.0  # outside cone
    near = theory.green_function([1.0, 0.0, 0.0], 1.0 + 1e-12)
    assert near.regular == pytest.approx(-1.0 / (4 * math.pi), rel=1e-6)
    assert near.shell_weight == pytest.approx(1.0 / (4 * math.pi), rel=1e-12)
    # small-argument series of the interior term: -(m^2/2pi)(1/2 - (ms)^2/16)
    t, r = 1.3, 1.2
    s = math.sqrt(t * t - r * r)
    val = theory.green_function([r, 0.0, 0.0], t).regular
    assert val == pytest.approx(-(1.0 / (2 * math.pi)) * (0.5 - s * s / 16.0), rel=1e-3)


def test_frequencies_and_wavelength():
    assert theory.zitter_frequency(0.5) == pytest.approx(math.sqrt(3) / 2, rel=1e-12)
    assert theory.zitter_frequency(0.0) == 1.0
    assert theory.max_frequency(0.0) == 1.0
    assert theory.max_frequency(0.455) == pytest.approx(1.3554594, abs=1e-6)
    assert theory.de_broglie_wavelength(np.array([0.0, 0.0])) == math.inf
    g = 0.511
    assert theory.de_broglie_wavelength(np.array([g, 0.0])) == pytest.approx(
        2 * math.pi / g, rel=1e-12
    )


# frozen from tests/oracles/compute_wavefront.py (boost-and-fit construction)
WF_U_SOURCE = 0.369318182
WF_U_EXPANSION = 0.276955855
WF_CONTRACTION = 0.923186183


def test_wavefront_reference_case():
    w = theory.wavefront(0.4, 0.3, 10.0)
    assert w.u_source == pytest.approx(WF_U_SOURCE, abs=1e-9)
    assert w.u_expansion == pytest.approx(WF_U_EXPANSION, abs=1e-9)
    assert w.semi_inline / w.semi_transverse == pytest.approx(WF_CONTRACTION, abs=1e-9)
    assert w.center[0] == pytest.approx(WF_U_SOURCE * 10.0, abs=1e-8)


def test_wavefront_rest_limit_is_circle():
    w = theory.wavefront(0.0, 0.45, 3.0)
    assert w.u_source == 0.0
    assert w.semi_inline == pytest.approx(w.semi_transverse, rel=1e-12)
    assert w.semi_transverse == pytest.approx(0.45 * 3.0, rel=1e-12)


@given(
    u0=st.floats(min_value=-0.9, max_value=0.9),
    v=st.floats(min_value=0.01, max_value=0.95),
)
def test_wavefront_degeneracies(u0, v):
    small = theory.wavefront(u0, 1e-9, 5.0)
    assert small.u_source == pytest.approx(u0, abs=1e-8)
    rest = theory.wavefront(0.0, v, 5.0)
    assert rest.u_expansion == pytest.approx(v, rel=1e-12)
    w = theory.wavefront(u0, v, 5.0)
    assert abs(w.u_source) < 1.0 and w.u_expansion < 1.0


def test_wavefront_rejects_bad_input():
    with pytest.raises(ValueError):
        theory.wavefront(1.0, 0.3, 1.0)
    with pytest.raises(ValueError):
        theory.wavefront(0.3, 0.3, -1.0)


def test_virtual_and_effective_mass():
    assert theory.virtual_mass(0.0) == 0.0
    assert theory.virtual_mass(163.8) == pytest.approx(1.0, rel=1e-12)
    assert theory.virtual_mass(53.3) == pytest.approx(0.105883, abs=1e-6)
    assert theory.effective_mass(53.3, m=2.0) == pytest.approx(2.0 * 1.105883, abs=1e-5)


def test_fit_constants_rows_and_interpolation():
    row = theory.fit_constants(53.3)
    assert (row.e_b, row.n_b) == (2.38, 28.0)
    mid = theory.fit_constants(0.5 * (40.0 + 53.3))
    assert 2.38 < mid.e_b < 2.87
    assert 28.0 < mid.n_b < 39.0
    with pytest.raises(ValueError):
        theory.fit_constants(5.0)
    with pytest.raises(ValueError):
        theory.fit_constants(90.0)


@given(b=st.floats(min_value=13.3, max_value=79.99))
@settings(max_examples=50)
def test_fit_constants_monotone(b):
    lo = theory.fit_constants(b)
    hi = theory.fit_constants(b + 0.01)
    assert hi.e_b <= lo.e_b
    assert hi.n_b <= lo.n_b


def test_uncertainty_bound_values():
    assert theory.uncertainty_bound(53.3, 1.0) == pytest.approx(7.05283e-4, abs=1e-8)
    # exponent 4 - 2 e_b flips sign across the table
    assert theory.uncertainty_bound(80.0, 1.5) > theory.uncertainty_bound(80.0, 1.0)
    assert theory.uncertainty_bound(13.3, 1.5) < theory.uncertainty_bound(13.3, 1.0)
    with pytest.raises(ValueError):
        theory.uncertainty_bound(53.3, 0.5)


def test_coupling_rescale():
    bt, bp = theory.coupling_rescale(53.3, 0.2, 0.5)
    assert bt == pytest.approx(29.072727, abs=1e-5)
    assert bp == pytest.approx(39.36466, abs=1e-4)
    assert theory.coupling_rescale(10.0, 0.0, 0.5) == (10.0, 10.0)
    bt0, bp0 = theory.coupling_rescale(10.0, 0.5, 0.5)
    assert bt0 == pytest.approx(0.0, abs=1e-14)
    assert bp0 == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(ValueError):
        theory.coupling_rescale(10.0, 0.2, 0.0)


def test_continuous_component_constant_and_singular():
    assert theory.continuous_component(lambda q: 4.2) == pytest.approx(4.2, rel=1e-12)
    pure = theory.continuous_component(
        lambda q: 1.7 / np.linalg.norm(q), singular_coeff=1.7, matrix=np.eye(3)
    )
    assert pure == pytest.approx(0.0, abs=1e-10)


def test_continuous_component_yukawa_offset():
    b, m = 2.5, 1.0

    def phi(q):
        r = np.linalg.norm(q)
        return b * math.exp(-m * r) / (4 * math.pi * m * r)

    val = theory.continuous_component(phi, singular_coeff=b / (4 * math.pi * m))
    assert val == pytest.approx(-b / (4 * math.pi), rel=1e-6)


@given(
    c=st.floats(min_value=-5.0, max_value=5.0),
    a=st.floats(min_value=-3.0, max_value=3.0),
    s1=st.floats(min_value=0.5, max_value=2.0),
    s2=st.floats(min_value=0.5, max_value=2.0),
    s3=st.floats(min_value=0.5, max_value=2.0),
)
@settings(max_examples=20, deadline=None)
def test_continuous_component_annihilates_singular_family(c, a, s1, s2, s3):
    a_mat = np.diag([s1, s2, s3])

    def phi(q):
        return c + a / math.sqrt(q @ a_mat @ q)

    val = theory.continuous_component(phi, singular_coeff=a, matrix=a_mat)
    assert val == pytest.approx(c, abs=1e-8)


def test_continuous_component_rejects_bad_matrix():
    with pytest.raises(ValueError):
        theory.continuous_component(lambda q: 0.0, matrix=np.diag([1.0, -1.0, 1.0]))


def test_theory_inputs_validation():
    theory.TheoryInputs(u0=0.5, v=0.3)
    with pytest.raises(ValueError):
        theory.TheoryInputs(u0=1.0)
    with pytest.raises(ValueError):
        theory.TheoryInputs(m=0.0)
