"""
Test suite cho transporter category, hàm tử và giới hạn ngược
"""

import itertools
import pytest
import numpy as np
import os
import sys

# Add project root to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from conftest import locality_matrix
from src.cohomology import permutation_module, trivial_module
from src.errors import FunctorInconsistent, InvalidInput, InvalidSpec, NotAMorphism
from src.group_library import group_library
from src.models import FunctorSpec
from src.transporter import (
    build_group_transporter, build_transporter, check_category_laws, check_functoriality, decompose_morphism,
    fixed_point_functor, full_subcategory, functor_from_spec, inverse_limit, limit_presentation,
    restrict_functor, t_essential_subcategory,
)


def _constant_spec(T, matrix_for=None):
    """Hàm tử hằng Z/2 với mọi ma trận [[1]]; matrix_for ghi đè theo id cấu xạ"""
    maps = {}
    for i, j, g in T.morphisms():
        key = T.morphism_id(i, j, g)
        maps[key] = (matrix_for or {}).get(key, [[1]])
    return FunctorSpec(values={str(i): [2] for i in range(len(T.objects))}, maps=maps)


def _limit_by_enumeration(T, F):
    """Đếm vét cạn các họ tương thích (x_P)"""
    spaces = [list(itertools.product(*(range(m) for m in v.cyclic_orders))) for v in F.values]
    count = 0
    for family in itertools.product(*spaces):
        ok = True
        for i, j, g in T.morphisms():
            A = F.matrix_of(i, j, g)
            image = (A @ np.array(family[j], dtype=np.int64)) if A.size else np.zeros(0, dtype=np.int64)
            orders = np.array(F.values[i].cyclic_orders, dtype=np.int64)
            if ((image - np.array(family[i], dtype=np.int64)) % orders).any():
                ok = False
                break
        count += ok
    return count


class TestCategory:
    """Test dựng transporter category"""

    def test_s3(self, s3_locality):
        """T(S3): hai đối tượng, Mor(1, 1) = S3, Mor(S, S) = S"""
        T = build_transporter(s3_locality)
        assert [P.order for P in T.objects] == [1, 2]
        assert len(T.mor(0, 0)) == 6
        assert len(T.mor(1, 1)) == 2
        assert T.mor(1, 0) == ()
        assert check_category_laws(T) == []

    @pytest.mark.parametrize("name,p,delta", locality_matrix())
    def test_category_laws(self, name, p, delta):
        """Đơn vị và hợp thành đóng"""
        G = group_library.get_group(name)
        assert check_category_laws(build_group_transporter(G, p, delta)) == []

    def test_essential_objects(self, s4_locality, klein):
        """T^e(S4) có đối tượng V và S"""
        Te = t_essential_subcategory(build_transporter(s4_locality))
        assert list(Te.objects) == [klein, s4_locality.S]

    def test_full_subcategory(self, s3_locality):
        """Tiểu phạm trù đầy giữ nguyên Mor"""
        T = build_transporter(s3_locality)
        sub = full_subcategory(T, [s3_locality.S])
        assert sub.mor(0, 0) == T.mor(1, 1)

    def test_position_errors(self, s3_locality, s3):
        """Phần tử không phải cấu xạ và đối tượng lạ"""
        T = build_transporter(s3_locality)
        with pytest.raises(NotAMorphism):
            T.position(1, 1, s3.parse_element("(1 2 3)"))
        with pytest.raises(InvalidInput):
            T.index_of(s3.whole)


class TestDecomposeMorphism:
    """Mọi cấu xạ phân tích thành hạn chế của tự đẳng cấu trong T^e"""

    @pytest.mark.parametrize("name,p,delta", locality_matrix())
    def test_every_morphism(self, name, p, delta):
        """Chuỗi liên tiếp, nằm trong T^e, hợp thành bằng g"""
        G = group_library.get_group(name)
        T = build_group_transporter(G, p, delta)
        Te = t_essential_subcategory(T)
        for i, j, g in T.morphisms():
            P, Q = T.objects[i], T.objects[j]
            chain = decompose_morphism(T, P, Q, g)
            assert chain[0].source == P and chain[-1].target == Q
            for a, b in zip(chain, chain[1:]):
                assert a.target == b.source
            for factor in chain:
                assert factor.source.conjugate(factor.element) <= factor.target
                k = Te.index_of(factor.support)
                assert factor.element in Te.automorphisms(k)
                assert factor.source <= factor.support
            assert G.fold(f.element for f in chain) == g

    def test_not_a_morphism(self, s3_locality, s3):
        """g không phải cấu xạ P -> Q"""
        T = build_transporter(s3_locality)
        with pytest.raises(NotAMorphism):
            decompose_morphism(T, s3_locality.S, s3_locality.S, s3.parse_element("(1 2 3)"))


class TestFunctors:
    """Test hàm tử và giới hạn ngược"""

    def test_constant_functor(self, s3_locality):
        """Hàm tử hằng Z/2 có giới hạn Z/2"""
        T = build_transporter(s3_locality)
        F = functor_from_spec(T, _constant_spec(T))
        assert check_functoriality(F) == []
        assert inverse_limit(T, F).invariant_factors() == [2]

    def test_inconsistent_functor(self, s3_locality, s3):
        """Ma trận 0 cho (1 2) trên S vi phạm tính hàm tử"""
        T = build_transporter(s3_locality)
        bad = _constant_spec(T, {T.morphism_id(1, 1, s3.parse_element("(1 2)")): [[0]]})
        with pytest.raises(FunctorInconsistent):
            functor_from_spec(T, bad)

    def test_missing_map(self, s3_locality):
        """Thiếu ma trận cho cấu xạ không đơn vị"""
        T = build_transporter(s3_locality)
        spec = _constant_spec(T)
        spec.maps.pop(next(k for k in spec.maps if not k.endswith(":()")))
        with pytest.raises(FunctorInconsistent):
            functor_from_spec(T, spec)

    def test_values_must_be_p_powers(self, s3_locality):
        """Giá trị Z/3 trên locality p=2 bị từ chối"""
        T = build_transporter(s3_locality)
        spec = _constant_spec(T)
        spec.values["0"] = [3]
        with pytest.raises(InvalidSpec):
            functor_from_spec(T, spec)

    def test_fixed_points_trivial(self, s4_locality, s4):
        """Điểm bất động của module tầm thường F2: cả hai giới hạn là [2]"""
        T = build_transporter(s4_locality)
        F = fixed_point_functor(T, trivial_module(s4, (2,)))
        Te = t_essential_subcategory(T)
        assert inverse_limit(T, F).invariant_factors() == [2]
        assert inverse_limit(Te, restrict_functor(F, Te)).invariant_factors() == [2]

    @pytest.mark.parametrize("name", ["S3", "S4"])
    def test_fixed_points_permutation(self, name):
        """lim_T = lim_{T^e} cho module hoán vị F2"""
        G = group_library.get_group(name)
        T = build_group_transporter(G, 2, "all")
        F = fixed_point_functor(T, permutation_module(G, 2))
        assert check_functoriality(F) == []
        Te = t_essential_subcategory(T)
        assert inverse_limit(T, F).is_isomorphic(inverse_limit(Te, restrict_functor(F, Te)))

    def test_limit_matches_enumeration(self, s3):
        """Giới hạn ngược khớp phép đếm họ tương thích"""
        T = build_group_transporter(s3, 2, "all")
        F = fixed_point_functor(T, permutation_module(s3, 2))
        assert [v.rank for v in F.values] == [3, 2]
        assert limit_presentation(T, F).order == _limit_by_enumeration(T, F)
