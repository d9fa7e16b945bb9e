from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from semwave import units as u
from semwave.errors import InvalidParameterError, UnknownQuantityError
from semwave.units import Dimension

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
dimensions = st.builds(Dimension, rationals, rationals, rationals)


def test_exponents_are_exact_and_reduced():
    d = Dimension("2/4", 1, "-6/3")
    assert d.exponents == (F(1, 2), F(1), F(-2))
    assert d == Dimension(F(1, 2), 1, -2)


def test_basic_operations():
    assert u.dim_mul(u.LENGTH, u.LENGTH) == Dimension(0, 2, 0)
    assert u.dim_pow(u.MASS * u.LENGTH, F(1, 2)) == Dimension(F(1, 2), F(1, 2), 0)
    assert u.dim_div(u.dimension_of("energy"), u.LENGTH) == Dimension(1, 1, -2)


@given(dimensions, dimensions, dimensions)
def test_group_laws(a, b, c):
    assert u.dim_mul(u.dim_mul(a, b), c) == u.dim_mul(a, u.dim_mul(b, c))
    assert u.dim_mul(a, b) == u.dim_mul(b, a)
    assert u.dim_pow(a, 0) == u.DIMENSIONLESS
    assert u.dim_mul(a, u.dim_pow(a, -1)).is_dimensionless()


@pytest.mark.parametrize(
    "name,expected",
    [
        ("energy", (1, 2, -2)),
        ("hbar", (1, 2, -1)),
        ("charge", (F(1, 2), F(1, 2), -1)),
        ("gauge_field", (F(-1, 2), F(-3, 2), 1)),
        ("velocity", (0, 1, -1)),
        ("momentum", (1, 1, -1)),
        ("action", (1, 2, -1)),
        ("frequency", (0, 0, -1)),
        ("q", (F(1, 2), F(1, 2), -1)),
    ],
)
def test_catalog_entries(name, expected):
    assert u.dimension_of(name) == Dimension(*expected)


def test_unknown_quantity():
    with pytest.raises(UnknownQuantityError):
        u.dimension_of("temperature")
    with pytest.raises(UnknownQuantityError):
        u.parse_dimension("E * kelvin")


def test_catalog_rederivation():
    assert u.derive_catalog() == u.CATALOG
    assert set(u.CATALOG) == {"mass", "length", "time", "velocity", "energy", "hbar", "charge",
                              "gauge_field", "momentum", "action", "frequency"}


def test_charge_from_first_principles():
    # E = m v^2, D_i psi ~ sqrt(E / x^3), [q][A] = [d_x] = 1/x and [q A] = [D_i] give [q] = x sqrt(E/x^3)
    energy = u.MASS * (u.LENGTH / u.TIME) ** 2
    charge = u.LENGTH * (energy / u.LENGTH**3) ** F(1, 2)
    assert charge.exponents == (F(1, 2), F(1, 2), F(-1))


@pytest.mark.parametrize(
    "identity",
    [
        "E = m*x^2/t^2",
        "hbar = m*x^2/t",
        "hbar = E*t",
        "q = (m*x)^1/2/t",
        "q = sqrt(m*x)/t",
        "A = 1/(q*x)",
        "A = t/(x*sqrt(m*x))",
        "q^2 = E/x",
        "q/x = sqrt(E/x^3)",
        "E/x = m*x/t^2",
        "p = m*v",
        "S = hbar",
        "omega = 1/t",
        "x^(1/2) * x^(1/2) = x",
        "q^-2 = x/E",
    ],
)
def test_printed_identities_hold(identity):
    assert u.check_identity_string(identity).holds


def test_mismatch_report():
    check = u.check_identity("hbar", "E")
    assert not check
    assert check.difference.exponents == (0, 0, 1)
    assert "FAIL" in check.describe() and "(0, 0, 1)" in check.describe()
    assert u.check_identity("q^2", "E/x").describe().startswith("PASS")


def test_charge_times_field_is_inverse_length():
    """[q][A] = 1/x by the definition of A; the sqrt(E/x^3) form belongs to [q]/[x]."""
    assert u.check_identity("q*A", "1/x").holds
    check = u.check_identity("q*A", "sqrt(E/x^3)")
    assert not check.holds
    assert check.difference.exponents == (F(-1, 2), F(-1, 2), 1)


@pytest.mark.parametrize(
    "text", ["", "E +", "E * (x", "x^", "x^y", "E = x", "3$", "sqrt x", "x^1/"],
)
def test_parse_errors(text):
    with pytest.raises((InvalidParameterError, UnknownQuantityError)):
        u.parse_dimension(text)


def test_identity_string_needs_one_equals():
    with pytest.raises(InvalidParameterError):
        u.check_identity_string("E = E = E")


def test_numeric_literals_are_dimensionless():
    assert u.parse_dimension("2*E/2") == u.dimension_of("energy")


def test_schrodinger_terms_are_homogeneous():
    assert u.check_equation_terms(["hbar/t", "hbar^2/(m*x^2)", "E"])


def test_heterogeneous_terms():
    assert not u.check_equation_terms(["E", "q"])
    with pytest.raises(InvalidParameterError):
        u.check_equation_terms(["E"])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lagrangian_matter_terms_are_homogeneous(n):
    terms = u.lagrangian_matter_terms(n)
    assert u.check_equation_terms(list(terms.values()))
    assert terms["kinetic"] == u.CATALOG["energy"] / u.LENGTH**n


def test_field_theory_mode_reproduces_catalog_at_three_dimensions():
    dims = u.field_theory_dimensions(3)
    assert dims["charge"] == u.CATALOG["charge"]
    assert dims["gauge_field"] == u.CATALOG["gauge_field"]
    assert dims["covariant_derivative"] == u.parse_dimension("sqrt(E/x^3)")


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_field_term_does_not_match_matter_density(n):
    """With [q A] = 1/x, F01^2 / q^2 scales as x^(2N - 8) / E^2, never as E / x^N."""
    dims = u.field_theory_dimensions(n)
    assert dims["field_term"] == u.LENGTH ** (2 * n - 8) / u.CATALOG["energy"] ** 2
    assert not u.check_equation_terms([dims["energy_density"], dims["field_term"]])


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_field_theory_dimension_validation(n):
    with pytest.raises(InvalidParameterError):
        u.field_theory_dimensions(n)


def test_catalog_table_lists_every_entry():
    table = u.catalog_table()
    for name in u.CATALOG:
        assert name in table
    assert "1/2" in table
