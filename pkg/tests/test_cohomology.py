"""
Test suite cho đối đồng điều nhóm và so sánh Cartan-Eilenberg
"""

import itertools
import pytest
import numpy as np
import os
import sys

# Add project root to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.cohomology import (
    GModule, check_action, check_cartan_eilenberg, coboundary, cohomology, cohomology_data, cohomology_functor,
    induced_map, integral_cohomology, module_from_spec, nullspace_mod_p, permutation_module, rref_mod_p,
    trivial_module,
)
from src.abelian import fixed_subgroup
from src.errors import ActionInvalid, BoundExceeded, InvalidSpec, ModuleNotPGroup, NotAMorphism
from src.group_library import group_library
from src.models import ModuleSpec
from src.transporter import build_group_transporter, check_functoriality


def _sign_module(s3):
    return module_from_spec(s3, ModuleSpec(orders=[3], action={"(1 2)": [[2]], "(1 2 3)": [[1]]}))


def _twisted_z4(s3):
    """Z/4 với (1 2) tác động bằng -1"""
    return module_from_spec(s3, ModuleSpec(orders=[4], action={"(1 2)": [[3]], "(1 2 3)": [[1]]}))


def _h1_by_enumeration(module):
    """|Z^1| / |B^1| bằng cách liệt kê mọi hàm G -> M (M cyclic)"""
    G = module.group
    m = module.orders[0]
    act = [int(module.matrix(g)[0, 0]) for g in G.elements()]
    cocycles = 0
    for f in itertools.product(range(m), repeat=G.order):
        if all(f[G.mul(a, b)] == (f[a] + act[a] * f[b]) % m for a in G.elements() for b in G.elements()):
            cocycles += 1
    boundaries = {tuple((act[a] * x - x) % m for a in G.elements()) for x in range(m)}
    return cocycles // len(boundaries)


class TestModules:
    """Test G-module"""

    def test_trivial(self, s3):
        """Module tầm thường hợp lệ"""
        M = trivial_module(s3, (2,))
        assert check_action(M) == []
        assert M.rank == 1

    @pytest.mark.parametrize("orders,expected", [((2,), 2), ((3, 3), 3), ((4,), None), ((2, 4), None), ((9,), None)])
    def test_elementary_prime(self, s3, orders, expected):
        """Số nguyên tố p chỉ khi mọi cấp cyclic bằng p"""
        assert trivial_module(s3, orders).elementary_prime() == expected

    def test_permutation(self, s4):
        """Module hoán vị là đồng cấu G -> GL_n(F_p)"""
        M = permutation_module(s4, 2)
        assert M.rank == 4
        assert check_action(M) == []

    def test_permutation_needs_points(self, s3):
        """Nhóm không có điểm bị từ chối"""
        from src.finite_group import quotient
        Q, _ = quotient(s3, s3.whole, s3.subgroup_from_strings(["(1 2 3)"]))
        with pytest.raises(InvalidSpec):
            permutation_module(Q, 2)

    def test_from_spec(self, s3):
        """Module dấu trên F3"""
        M = _sign_module(s3)
        assert int(M.matrix(s3.parse_element("(1 3)"))[0, 0]) == 2
        assert int(M.matrix(s3.parse_element("(1 3 2)"))[0, 0]) == 1

    def test_inconsistent_spec(self, s3):
        """3-chu trình tác động bằng 2 trên F3 không phải đồng cấu"""
        with pytest.raises(ActionInvalid):
            module_from_spec(s3, ModuleSpec(orders=[3], action={"(1 2 3)": [[2]], "(1 2)": [[1]]}))

    def test_generators_must_generate(self, s3):
        """Tác động chỉ trên (1 2) không phủ S3"""
        with pytest.raises(ActionInvalid):
            module_from_spec(s3, ModuleSpec(orders=[2], action={"(1 2)": [[1]]}))

    def test_invalid_action(self, s3):
        """Mảng tác động không phải đồng cấu bị từ chối"""
        action = np.ones((6, 1, 1), dtype=np.int64)
        action[1] = 0
        with pytest.raises(ActionInvalid):
            GModule(s3, (2,), action)

    def test_orders_validated(self):
        """Cấp cyclic < 2 bị từ chối"""
        with pytest.raises(ValueError):
            ModuleSpec(orders=[1])


class TestLinearAlgebra:
    """Test khử Gauss trên F_p"""

    def test_rref_and_nullspace(self):
        """A N = 0 và số chiều khớp hạng"""
        A = np.array([[1, 2, 0, 1], [2, 4, 1, 0], [0, 0, 1, 1]])
        _, pivots = rref_mod_p(A, 3)
        N = nullspace_mod_p(A, 3)
        assert not ((A @ N) % 3).any()
        assert N.shape[1] == 4 - len(pivots)


class TestCohomology:
    """Test H^n(G; M)"""

    def test_coboundary_squares_to_zero(self, s3):
        """d^(n+1) d^n = 0"""
        M = _sign_module(s3)
        for n in (0, 1):
            assert not ((coboundary(s3, M, n + 1) @ coboundary(s3, M, n)) % 3).any()

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_s3_trivial_f2(self, s3, n):
        """H^n(S3; F2) = F2 với n = 0, 1, 2"""
        assert cohomology(s3, trivial_module(s3, (2,)), n).invariant_factors() == [2]

    def test_h1_matches_enumeration(self, s3):
        """|H^1| khớp phép liệt kê cocycle"""
        for M in (trivial_module(s3, (2,)), trivial_module(s3, (3,)), _sign_module(s3)):
            assert cohomology(s3, M, 1).order == _h1_by_enumeration(M)

    def test_subgroup(self, s4, klein):
        """H^1(V; F2) = F2 x F2"""
        assert cohomology(klein, trivial_module(s4, (2,)), 1).invariant_factors() == [2, 2]

    def test_degree_zero_any_module(self, s3):
        """Bậc 0 nhận module không sơ cấp"""
        assert cohomology(s3, trivial_module(s3, (4,)), 0).invariant_factors() == [4]
        assert cohomology(s3, trivial_module(s3, (2, 4)), 0).invariant_factors() == [2, 4]

    def test_h0_is_fixed_points(self, s3, s4):
        """H^0 từ phức bar bằng M^G tính trực tiếp"""
        modules = [
            trivial_module(s3, (2,)), trivial_module(s3, (4,)), trivial_module(s3, (2, 4)),
            _sign_module(s3), _twisted_z4(s3), permutation_module(s3, 2), permutation_module(s4, 2),
        ]
        for M in modules:
            G = M.group
            fixed = fixed_subgroup(M.orders, [M.matrix(x) for x in G.whole.generators()])
            assert cohomology(G, M, 0).invariant_factors() == fixed.as_abpres().invariant_factors()

    def test_bounds(self, s3):
        """Bậc vượt giới hạn ném BoundExceeded"""
        with pytest.raises(BoundExceeded):
            cohomology(s3, trivial_module(s3, (2,)), 3)

    def test_permutation_h0(self, s3):
        """H^0 của module hoán vị F2^3 là F2"""
        assert cohomology(s3, permutation_module(s3, 2), 0).invariant_factors() == [2]


class TestIntegralCoefficients:
    """Test hệ số ⊕ Z/p^k không sơ cấp"""

    def test_cyclic_z4(self):
        """H^n(C2; Z/4) = Z/4, Z/2, Z/2 với n = 0, 1, 2"""
        C2 = group_library.get_group("C2")
        M = trivial_module(C2, (4,))
        assert [cohomology(C2, M, n).invariant_factors() for n in (0, 1, 2)] == [[4], [2], [2]]

    def test_cyclic_z2_z4(self):
        """H^n(C2; Z/2 x Z/4) = Z/2 x Z/4, (Z/2)^2, (Z/2)^2"""
        C2 = group_library.get_group("C2")
        M = trivial_module(C2, (2, 4))
        assert [cohomology(C2, M, n).invariant_factors() for n in (0, 1, 2)] == [[2, 4], [2, 2], [2, 2]]

    def test_s3_z4(self, s3):
        """H^1(S3; Z/4) = Hom(S3, Z/4) = Z/2, H^2(S3; Z/4) = Ext(Z/2, Z/4) = Z/2"""
        M = trivial_module(s3, (4,))
        assert cohomology(s3, M, 1).invariant_factors() == [2]
        assert cohomology(s3, M, 2).invariant_factors() == [2]

    def test_h1_matches_enumeration(self, s3):
        """|H^1| với hệ số Z/4 khớp phép liệt kê cocycle"""
        for M in (trivial_module(s3, (4,)), _twisted_z4(s3)):
            assert cohomology(s3, M, 1).order == _h1_by_enumeration(M)

    def test_klein_z2_z4(self, s4, klein):
        """H^1(V; Z/2 x Z/4) = Hom(V, Z/2 x Z/4) = (Z/2)^4"""
        assert cohomology(klein, trivial_module(s4, (2, 4)), 1).invariant_factors() == [2, 2, 2, 2]

    @pytest.mark.parametrize("n", [0, 1])
    def test_agrees_with_modular_path(self, s3, n):
        """Đường dạng Smith cho cùng kết quả với F_p trên module sơ cấp"""
        for M in (trivial_module(s3, (2,)), _sign_module(s3), permutation_module(s3, 2)):
            assert integral_cohomology(s3, M, n).as_abpres().is_isomorphic(cohomology(s3, M, n))

    def test_klein_degree_two(self, s4, klein):
        """H^2(V; F2) = F2^3 theo cả hai đường"""
        M = trivial_module(s4, (2,))
        assert integral_cohomology(klein, M, 2).invariant_factors == (2, 2, 2)
        assert cohomology(klein, M, 2).invariant_factors() == [2, 2, 2]

    def test_representatives_are_cocycles(self, s3):
        """Cocycle đại diện nằm trong hạt nhân d^1 và có tọa độ lớp là cơ sở chuẩn"""
        M = trivial_module(s3, (2, 4))
        data = integral_cohomology(s3, M, 1)
        orders = np.array(M.orders * (s3.order ** 2), dtype=np.int64)[:, None]
        assert not ((coboundary(s3, M, 1) @ data.representatives) % orders).any()
        assert (data.classes_of(data.representatives) == np.eye(data.dimension, dtype=np.int64)).all()


class TestInducedMaps:
    """Test ánh xạ cảm sinh"""

    def test_restriction_to_sylow(self, s3):
        """Hạn chế H^1(S3; F2) -> H^1(S; F2) là đẳng cấu"""
        T = build_group_transporter(s3, 2, "all")
        S = T.objects[1]
        M = trivial_module(s3, (2,))
        A = induced_map(S, s3.whole, 0, M, 1)
        assert A.shape == (1, 1) and int(A[0, 0]) == 1

    def test_not_a_morphism(self, s4, klein):
        """P^g không nằm trong Q"""
        M = trivial_module(s4, (2,))
        with pytest.raises(NotAMorphism):
            induced_map(s4.whole, klein, 0, M, 1)

    @pytest.mark.parametrize("n", [1, 2])
    def test_functor(self, s3, n):
        """H^n(-; F2) là hàm tử trên T_S(S3)"""
        T = build_group_transporter(s3, 2, "all")
        F = cohomology_functor(T, trivial_module(s3, (2,)), n)
        assert check_functoriality(F) == []
        assert [v.invariant_factors() for v in F.values] == [[], [2]]

    @pytest.mark.parametrize("orders,n", [((2,), 1), ((2,), 2), ((4,), 1), ((2, 4), 1)])
    def test_inner_conjugation_is_identity(self, s4_locality, s4, orders, n):
        """g in P cảm sinh đồng nhất trên H^n(P; M)"""
        P = s4_locality.S
        M = trivial_module(s4, orders)
        dim = cohomology_data(P, M, n).dimension
        assert dim > 0
        for g in P.members:
            assert (induced_map(P, P, g, M, n) == np.eye(dim, dtype=np.int64)).all()

    def test_inner_identity_twisted(self, s3):
        """Tác động không tầm thường: S liên hợp bởi chính nó là đồng nhất"""
        T = build_group_transporter(s3, 2, "all")
        S = T.objects[1]
        M = _twisted_z4(s3)
        dim = cohomology_data(S, M, 1).dimension
        for g in S.members:
            assert (induced_map(S, S, g, M, 1) == np.eye(dim, dtype=np.int64)).all()

    def test_integral_functor(self, s3):
        """H^1(-; Z/4) là hàm tử trên T_S(S3)"""
        T = build_group_transporter(s3, 2, "all")
        F = cohomology_functor(T, trivial_module(s3, (4,)), 1)
        assert check_functoriality(F) == []
        assert [v.invariant_factors() for v in F.values] == [[], [2]]

    def test_cocycle_data_cached(self, s3):
        """Dữ liệu đối đồng điều được nhớ trên module"""
        M = trivial_module(s3, (2,))
        assert cohomology_data(s3, M, 1) is cohomology_data(s3, M, 1)


class TestCartanEilenberg:
    """H^n(G) = lim_T H^n = lim_{T^e} H^n"""

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_s3(self, s3, n):
        """S3, p=2, F2 tầm thường"""
        report = check_cartan_eilenberg(s3, 2, trivial_module(s3, (2,)), n)
        assert report.equal
        assert report.H == report.lim_T == report.lim_Te == [2]

    @pytest.mark.parametrize("n", [0, 1])
    def test_s4(self, s4, n):
        """S4, p=2, F2 tầm thường"""
        report = check_cartan_eilenberg(s4, 2, trivial_module(s4, (2,)), n)
        assert report.equal
        assert report.H == [2]

    def test_permutation_module(self, s4):
        """Module hoán vị F2^4 của S4 ở bậc 1"""
        report = check_cartan_eilenberg(s4, 2, permutation_module(s4, 2), 1)
        assert report.equal

    @pytest.mark.parametrize("orders,n,expected", [((4,), 0, [4]), ((4,), 1, [2]), ((2, 4), 1, [2, 2])])
    def test_s3_integral(self, s3, orders, n, expected):
        """S3, p=2, hệ số không sơ cấp"""
        report = check_cartan_eilenberg(s3, 2, trivial_module(s3, orders), n)
        assert report.equal
        assert report.H == report.lim_T == report.lim_Te == expected

    def test_twisted_coefficients(self, s3):
        """Z/4 với tác động dấu"""
        assert check_cartan_eilenberg(s3, 2, _twisted_z4(s3), 1).equal

    def test_module_must_be_p_group(self, s3):
        """Z/3 không phải 2-nhóm"""
        with pytest.raises(ModuleNotPGroup):
            check_cartan_eilenberg(s3, 2, trivial_module(s3, (3,)), 1)
