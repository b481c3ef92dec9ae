from fractions import Fraction

import pytest

from filament.derivations import commutator, functional_equal
from filament.diffalg import (
    ONE,
    ZERO,
    K,
    Functional,
    NotExact,
    antiderivative,
    euler_derivative,
    kder,
    total_derivative,
)
from filament.exprio import format_poly, parse
from filament.hamiltonian import (
    H0,
    H1,
    MKDV,
    CovectorField,
    HierarchyError,
    apply_D,
    check_bihamiltonian,
    hierarchy_commutators,
    mkdv_hierarchy,
    pi0,
    pi1,
    poisson_pi1,
    recursion,
)
from filament.sampling import random_poly

from conftest import read_golden

SMALL = dict(max_degree=3, max_order=2, max_terms=3)


def _variational(rng):
    """Random Euler derivative: the densities for which ``k p'`` is always exact."""
    while True:
        p = euler_derivative(random_poly(rng, **SMALL))
        if p:
            return p


@pytest.mark.parametrize("p, expected", [
    ("k", "k'"),
    ("1", "0"),
    ("-k'' - 1/2 k^3", "-k''' - 3/2 k^2 k'"),
])
def test_pi0_examples(p, expected):
    assert pi0(parse(p)).a == parse(expected)


@pytest.mark.parametrize("p, expected", [
    ("k", "k''' + 3/2 k^2 k'"),
    ("1", "0"),
    ("0", "0"),
    ("k^2", "2 k k''' + 6 k' k'' + 8/3 k^3 k'"),
])
def test_apply_D_and_pi1_examples(p, expected):
    assert apply_D(parse(p)) == parse(expected)
    assert pi1(CovectorField(parse(p))).a == parse(expected)


def test_apply_D_reports_non_exact_inner_product():
    with pytest.raises(NotExact):
        apply_D(kder(1) ** 2)


def test_covector_pairing():
    assert CovectorField(K).pair(kder(1)).is_zero
    assert CovectorField(ONE).pair(K) == Functional(K)


@pytest.mark.parametrize("a, expected", [("k'", MKDV), ("0", ZERO)])
def test_recursion_examples(a, expected):
    assert recursion(parse(a)).a == expected


def test_recursion_rejects_non_exact_argument():
    with pytest.raises(NotExact) as info:
        recursion(K)
    assert info.value.witness == ONE


def test_recursion_consistency_random(rng):
    checked = 0
    for _ in range(60):
        q = random_poly(rng, **SMALL).without_constant()
        a = total_derivative(q)
        try:
            lhs = recursion(a).a
        except NotExact:
            with pytest.raises(NotExact):
                apply_D(antiderivative(a))
            continue
        assert lhs == apply_D(antiderivative(a))
        checked += 1
    assert checked >= 10


def test_hierarchy_levels():
    flows = mkdv_hierarchy(2)
    assert [f.a for f in flows[:1]] == [MKDV]
    golden = read_golden("hierarchy_computed.txt")
    assert format_poly(flows[1].a) == golden["V2.g"]
    assert flows[2].a.order == 7
    top = [m for m in flows[2].a.terms if m.factors == ((7, 1),)]
    assert len(top) == 1 and top[0].coeff == 1


def test_hierarchy_second_flow_matches_reference_v2_normal():
    reference = read_golden("hierarchy_reference.txt")
    # sigma^2 = 1, so level two carries no sign
    assert format_poly(mkdv_hierarchy(1)[1].a) == reference["V2.g"]


def test_hierarchy_depth_limit():
    with pytest.raises(ValueError):
        mkdv_hierarchy(6)
    assert len(mkdv_hierarchy(6, depth_limit=6)) == 7


def test_hierarchy_error_carries_level():
    err = HierarchyError(3, NotExact(K, ONE, "D_s^-1(a)"))
    assert err.level == 3 and "level 3" in str(err)


def test_commuting_flows_depth_three():
    comm = hierarchy_commutators(mkdv_hierarchy(3))
    assert len(comm) == 6
    assert all(c.is_zero for c in comm.values())


def test_poisson_examples():
    assert poisson_pi1(H0, H0).is_zero
    assert poisson_pi1(H0, H1).is_zero
    assert poisson_pi1(Functional(K), H0).is_zero


def test_poisson_antisymmetry_random(rng):
    for _ in range(40):
        F = Functional(random_poly(rng, **SMALL))
        Gf = Functional(random_poly(rng, **SMALL))
        assert functional_equal(poisson_pi1(F, Gf), -poisson_pi1(Gf, F))


def test_poisson_matches_operator_pairing(rng):
    # the displayed integrand is -int (D dF) dG, the pairing through pi1
    for _ in range(20):
        F = Functional(random_poly(rng, **SMALL))
        Gf = Functional(random_poly(rng, **SMALL))
        dF = euler_derivative(F.representative)
        dG = euler_derivative(Gf.representative)
        assert functional_equal(poisson_pi1(F, Gf), Functional(-apply_D(dF) * dG))


def test_operator_is_skew_adjoint(rng):
    for _ in range(30):
        a, b = _variational(rng), _variational(rng)
        assert functional_equal(Functional(a * apply_D(b)), Functional(-apply_D(a) * b))


def test_bihamiltonian_report_under_given_H1():
    rep = check_bihamiltonian()
    assert rep.c1.a == MKDV and rep.c1_is_mkdv
    assert rep.c0.a == -MKDV
    assert rep.sigma == -1 and rep.paper_sign_note
    assert "sigma = -1 (paper sign note)" in rep.lines()


def test_bihamiltonian_report_with_flipped_H1():
    rep = check_bihamiltonian(h1=-H1)
    assert rep.sigma == 1 and not rep.paper_sign_note
    assert rep.c0.a == MKDV


def test_bihamiltonian_report_mismatch_is_not_an_exception():
    rep = check_bihamiltonian(h1=Functional(Fraction(1, 2) * K**2))
    assert rep.sigma is None
    assert any("none" in line for line in rep.lines())


def _hereditary_defect(xi, eta):
    R = recursion
    return (commutator(R(xi), R(eta)) - R(commutator(R(xi), eta)) - R(commutator(xi, R(eta)))
            + R(R(commutator(xi, eta))))


@pytest.mark.parametrize("i, j", [(0, 1), (0, 2), (1, 2)])
def test_hereditary_on_hierarchy(i, j):
    flows = [kder(1)] + [f.a for f in mkdv_hierarchy(1)]
    assert _hereditary_defect(flows[i], flows[j]).is_zero
