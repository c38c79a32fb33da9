"""
Test suite cho nhóm con essential và phân tích essential
"""

import pytest
import os
import sys

# Add project root to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from conftest import locality_matrix
from src.alperin import (
    Certificate, certificate_from_model, certificate_to_model, decompose, essentials, invert_certificate,
    is_decomposable_over, supported_closure, verify_certificate,
)
from src.errors import InvalidInput, InvalidSpec, NotInLocality
from src.finite_group import all_subgroups, quotient
from src.fusion import is_fully_normalized
from src.group_library import group_library
from src.locality import build_group_locality, normalizer_L
from src.models import CertificateModel, FactorModel
from src.p_embedding import strongly_p_embedded_bruteforce


class TestEssentials:
    """Test essentials()"""

    def test_s3(self, s3_locality, s3):
        """Essential duy nhất của S3 là nhóm tầm thường"""
        assert essentials(s3_locality) == [s3.trivial]

    def test_s4_is_klein(self, s4_locality, klein):
        """essentials(S4, p=2) = {V}"""
        assert essentials(s4_locality) == [klein]

    def test_s4_bruteforce(self, s4_locality, s4, klein):
        """Quét định nghĩa trên mọi nhóm con của S cho cùng kết quả"""
        L = s4_locality
        found = []
        for P in all_subgroups(s4, within=L.S):
            if P == L.S or not is_fully_normalized(L, P):
                continue
            quot, _ = quotient(s4, normalizer_L(L, P), P)
            if strongly_p_embedded_bruteforce(quot, 2).exists:
                found.append(P)
        assert found == [klein]

    def test_sylow_only(self, s4):
        """Delta = {S} không có essential"""
        L = build_group_locality(s4, 2, {"explicit": [["(1 2 3 4)", "(1 3)"]]}, S=s4.subgroup_from_strings(["(1 2 3 4)", "(1 3)"]))
        assert essentials(L) == []


class TestDecompose:
    """Test decompose()"""

    def test_s3_three_cycle(self, s3_locality, s3):
        """(1 2 3) phân tích qua Q = 1 với đúng một nhân tử"""
        g = s3.parse_element("(1 2 3)")
        cert = decompose(s3_locality, g)
        assert len(cert.factors) == 1
        assert cert.factors[0] == (s3.trivial, g)
        assert verify_certificate(s3_locality, cert).passed

    def test_s3_transposition(self, s3_locality, s3):
        """Phần tử của S phân tích qua S"""
        g = s3.parse_element("(1 2)")
        cert = decompose(s3_locality, g)
        assert cert.factors == ((s3_locality.S, g),)

    def test_s3_needs_trivial_support(self, s3_locality, s3):
        """Bao đóng của N_L(S) không chứa (1 2 3)"""
        L = s3_locality
        g = s3.parse_element("(1 2 3)")
        assert g not in supported_closure(L, [L.S])
        assert not is_decomposable_over(L, g, [L.S])
        assert is_decomposable_over(L, g, essentials(L) + [L.S])

    def test_s4_three_cycle(self, s4_locality, s4, klein):
        """Nhân tử của (1 2 3) có Q thuộc {V, S}"""
        L = s4_locality
        cert = decompose(L, s4.parse_element("(1 2 3)"))
        assert cert.factors
        assert all(Q in (klein, L.S) for Q in cert.supports())
        assert verify_certificate(L, cert).passed

    def test_identity(self, s4_locality):
        """Đơn vị phân tích qua S"""
        cert = decompose(s4_locality, 0)
        assert cert.factors == ((s4_locality.S, 0),)
        assert verify_certificate(s4_locality, cert).passed

    def test_not_in_locality(self, s3):
        """Phần tử ngoài L ném NotInLocality"""
        L = build_group_locality(s3, 2, "nontrivial")
        with pytest.raises(NotInLocality):
            decompose(L, s3.parse_element("(1 2 3)"))

    def test_deterministic(self, s4_locality, s4):
        """Hai lần gọi cho cùng chứng chỉ"""
        g = s4.parse_element("(1 2 3 4)")
        assert decompose(s4_locality, g) == decompose(s4_locality, g)

    @pytest.mark.parametrize("name,p,delta", locality_matrix())
    def test_totality(self, name, p, delta):
        """Mọi g in L có chứng chỉ hợp lệ"""
        L = build_group_locality(group_library.get_group(name), p, delta)
        for g in L.members:
            report = verify_certificate(L, decompose(L, g))
            assert report.passed, (name, p, delta, report.violations[:2])


class TestVerifyCertificate:
    """Test verify_certificate và các thao tác trên chứng chỉ"""

    def test_mutated_element(self, s3_locality, s3):
        """Đổi phần tử của nhân tử làm hỏng chứng chỉ"""
        g = s3.parse_element("(1 2 3)")
        cert = decompose(s3_locality, g)
        Q, _ = cert.factors[0]
        bad = Certificate(g, ((Q, s3.parse_element("(1 3 2)")),))
        report = verify_certificate(s3_locality, bad)
        assert not report.passed
        assert "word-product" in {v.clause for v in report.violations}

    def test_mutated_support(self, s3_locality, s3):
        """Q không phải essential hay S bị phát hiện"""
        g = s3.parse_element("(1 2 3)")
        bad = Certificate(g, ((s3.whole, g),))
        clauses = {v.clause for v in verify_certificate(s3_locality, bad).violations}
        assert "factor-support" in clauses
        assert "factor-s-value" in clauses

    def test_factor_times_sylow_element(self, s4_locality, s4):
        """Thay x bằng x*s với s thuộc S \\ Q làm hỏng chứng chỉ"""
        L = s4_locality
        mutated = 0
        for g in s4.elements():
            cert = decompose(L, g)
            for i, (Q, x) in enumerate(cert.factors):
                for s in L.S.members:
                    if s in Q.members:
                        continue
                    factors = list(cert.factors)
                    factors[i] = (Q, s4.mul(x, s))
                    report = verify_certificate(L, Certificate(g, tuple(factors)))
                    assert not report.passed
                    assert {v.clause for v in report.violations} & {"word-product", "factor-normalizes"}
                    mutated += 1
        assert mutated > 0

    def test_target_outside(self, s3):
        """target ngoài L"""
        L = build_group_locality(s3, 2, "nontrivial")
        report = verify_certificate(L, Certificate(s3.parse_element("(1 2 3)"), ()))
        assert [v.clause for v in report.violations] == ["target-in-locality"]

    def test_invert(self, s4_locality, s4):
        """Nghịch đảo chứng chỉ là chứng chỉ của g^-1"""
        g = s4.parse_element("(1 2 3 4)")
        inverse = invert_certificate(s4_locality, decompose(s4_locality, g))
        assert inverse.target == s4.inv(g)
        assert verify_certificate(s4_locality, inverse).passed

    def test_invert_invalid(self, s3_locality, s3):
        """Không nghịch đảo chứng chỉ sai"""
        with pytest.raises(InvalidInput):
            invert_certificate(s3_locality, Certificate(s3.parse_element("(1 2 3)"), ()))

    def test_model_round_trip(self, s4_locality, s4):
        """Chứng chỉ qua JSON vẫn hợp lệ"""
        cert = decompose(s4_locality, s4.parse_element("(1 2 3)"))
        model = CertificateModel.model_validate_json(certificate_to_model(s4_locality, cert).model_dump_json())
        assert certificate_from_model(s4_locality, model) == cert

    def test_model_unparseable(self, s3_locality):
        """Chứng chỉ không đọc được ném InvalidSpec"""
        model = CertificateModel(target="(1 2 3)", factors=[FactorModel(Q=["(1 9)"], x="(1 2)")])
        with pytest.raises(InvalidSpec):
            certificate_from_model(s3_locality, model)
