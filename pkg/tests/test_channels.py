import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entpump.channels import (
    KrausMap,
    PumpConstructionError,
    apply,
    compose,
    eigenspace_population,
    identity_map,
    is_cptp,
    make_pump_map,
)
from entpump.qmat import basis_state, bell_state, check_density, maximally_mixed, population, projector, random_density

# Literal Bell-case operators, written out independently of the library.
_I4 = np.eye(4)
_ZZ = np.diag([1.0, -1, -1, 1])
_X1 = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
_Z1 = np.diag([1.0, 1, -1, -1])
_XX = np.fliplr(np.eye(4))


def oracle_pump(stab, flip, p):
    wrong = (_I4 - stab) / 2
    right = (_I4 + stab) / 2
    return [np.sqrt(p) * flip @ wrong, right + np.sqrt(1 - p) * wrong]


def oracle_apply(ops, rho):
    return sum(e @ rho @ e.conj().T for e in ops)


def zz_map(p, sign=1):
    return make_pump_map("ZZ", 0, "X", p, sign)


def xx_map(p, sign=1):
    return make_pump_map("XX", 0, "Z", p, sign)


def test_operators_match_literal_oracle():
    for p in (0.0, 0.37, 1.0):
        for got, want in zip(zz_map(p).operators, oracle_pump(_ZZ, _X1, p)):
            assert np.allclose(got, want, atol=1e-15)
        for got, want in zip(xx_map(p).operators, oracle_pump(_XX, _Z1, p)):
            assert np.allclose(got, want, atol=1e-15)


def test_deterministic_flip_of_wrong_state():
    out = apply(zz_map(1.0), projector(basis_state("01")))
    assert np.allclose(out, projector(basis_state("11")), atol=1e-12)


def test_p_zero_is_identity(rng):
    for _ in range(5):
        rho = random_density(2, rng)
        assert np.allclose(apply(zz_map(0.0), rho), rho, atol=1e-12)


def test_xx_pump_phi_minus_to_phi_plus():
    out = apply(xx_map(1.0), projector(bell_state("phi-")))
    assert np.allclose(out, projector(bell_state("phi+")), atol=1e-12)


@pytest.mark.parametrize("p", np.linspace(0, 1, 11))
def test_zz_on_mixed_gives_half_plus_half_p(p):
    out = apply(zz_map(p), maximally_mixed(2))
    assert eigenspace_population(out, "ZZ", 1) == pytest.approx((1 + p) / 2, abs=1e-12)


@pytest.mark.parametrize("p", np.linspace(0, 1, 11))
def test_two_stage_phi_plus_population(p):
    out = apply(xx_map(p), apply(zz_map(p), maximally_mixed(2)))
    want = population(oracle_apply(oracle_pump(_XX, _Z1, p), oracle_apply(oracle_pump(_ZZ, _X1, p), _I4 / 4)),
                      bell_state("phi+"))
    assert population(out, bell_state("phi+")) == pytest.approx(want, abs=1e-12)
    assert population(out, bell_state("phi+")) == pytest.approx((1 + p) ** 2 / 4, abs=1e-12)


def test_is_cptp_examples():
    assert is_cptp(make_pump_map("ZZ", 0, "X", 0.37, 1))
    assert not is_cptp(KrausMap((np.sqrt(0.5) * np.eye(4),)))
    assert not is_cptp(KrausMap((zz_map(0.5).operators[0],)))


def test_commuting_flip_rejected():
    with pytest.raises(PumpConstructionError):
        make_pump_map("ZZ", 0, "Z", 0.5)
    with pytest.raises(PumpConstructionError):
        make_pump_map("ZI", 1, "X", 0.5)


@pytest.mark.parametrize("p", [-0.1, 1.01])
def test_p_out_of_range(p):
    with pytest.raises(ValueError):
        make_pump_map("ZZ", 0, "X", p)


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        apply(zz_map(0.5), maximally_mixed(3))


def test_compose_with_identity(rng):
    m = make_pump_map("ZZ", 0, "X", 0.4, -1)
    c = compose(identity_map(2), m)
    for _ in range(20):
        rho = random_density(2, rng)
        assert np.allclose(apply(c, rho), apply(m, rho), atol=1e-12)


@pytest.mark.parametrize("bits", ["00", "01", "10", "11"])
def test_one_cycle_reaches_phi_plus_from_each_basis_state(bits):
    c = compose(xx_map(1.0), zz_map(1.0))
    out = apply(c, projector(basis_state(bits)))
    assert population(out, bell_state("phi+")) == pytest.approx(1.0, abs=1e-12)


def test_compose_dimension_mismatch():
    with pytest.raises(ValueError):
        compose(zz_map(0.5), make_pump_map("ZZZ", 0, "X", 0.5))


pump_args = st.tuples(
    st.sampled_from([("ZZ", 0, "X"), ("XX", 0, "Z"), ("ZZII", 1, "X"), ("IZZI", 2, "X"), ("XXXX", 0, "Z")]),
    st.floats(0, 1),
    st.sampled_from([1, -1]),
)


@settings(max_examples=40, deadline=None)
@given(args=pump_args, seed=st.integers(0, 2**32 - 1))
def test_pump_properties(args, seed):
    (stab, q, letter), p, sign = args
    m = make_pump_map(stab, q, letter, p, sign)
    n = len(stab)
    r = np.random.default_rng(seed)
    assert is_cptp(m)
    rho = random_density(n, r)
    out = apply(m, rho)
    check_density(out)
    # monotone pumping and exact (1-p) decay of the wrong eigenspace
    before = eigenspace_population(rho, stab, sign)
    after = eigenspace_population(out, stab, sign)
    assert after >= before - 1e-12
    assert eigenspace_population(out, stab, -sign) == pytest.approx((1 - p) * (1 - before), abs=1e-12)
    # the target eigenspace is invariant
    from entpump.pauli import stabilizer_projector

    proj = stabilizer_projector(stab, sign)
    inside = proj @ rho @ proj
    inside /= np.trace(inside)
    assert np.max(np.abs(apply(m, inside) - inside)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(p1=st.floats(0, 1), p2=st.floats(0, 1), seed=st.integers(0, 2**32 - 1))
def test_compose_matches_sequential_and_stays_cptp(p1, p2, seed):
    a, b = xx_map(p1, -1), zz_map(p2)
    c = compose(a, b)
    assert is_cptp(c)
    rho = random_density(2, np.random.default_rng(seed))
    assert np.max(np.abs(apply(c, rho) - apply(a, apply(b, rho)))) < 1e-12


@pytest.mark.parametrize("p", [0.0, 0.3, 0.9, 1.0])
def test_repeated_cycles_wrong_population(p):
    rho = maximally_mixed(2)
    m = zz_map(p)
    for k in range(1, 8):
        rho = apply(m, rho)
        assert eigenspace_population(rho, "ZZ", -1) == pytest.approx((1 - p) ** k / 2, abs=1e-12)
