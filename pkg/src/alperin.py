"""
Nhóm con L-essential và phân tích essential mang tính xây dựng.

Mỗi g in L được viết thành Pi(w) với w = (x_1, ..., x_n), x_i in N_L(Q_i), S_{x_i} = Q_i,
Q_i essential hoặc bằng S, và S_w = S_g. Kết quả là một Certificate có thể kiểm tra độc lập.
"""

import logging
import sys
import pathlib
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from src.errors import InternalInvariantViolation, InvalidInput, InvalidSpec, ToolkitError
from src.finite_group import Subgroup, generated_subgroup, normalizer, quotient
from src.fusion import fully_normalized_rep, is_fully_normalized
from src.locality import Locality, Word, normalizer_L
from src.models import CertificateModel, FactorModel, VerificationReport
from src.p_embedding import express_word, intersection_generators, strongly_p_embedded

logger = logging.getLogger(__name__)

Factor = Tuple[Subgroup, int]


@dataclass(frozen=True)
class Certificate:
    """Phân tích essential của target: danh sách (Q_i, x_i)"""

    target: int
    factors: Tuple[Factor, ...]

    def word(self) -> Word:
        return tuple(x for _, x in self.factors)

    def supports(self) -> List[Subgroup]:
        return [Q for Q, _ in self.factors]


def essentials(L: Locality) -> List[Subgroup]:
    """
    Mọi P in Delta, P != S, chuẩn hóa đầy đủ và N_L(P)/P có nhóm con nhúng p-mạnh.
    """

    def compute() -> List[Subgroup]:
        found = []
        for P in L.delta:
            if P == L.S or not is_fully_normalized(L, P):
                continue
            N = normalizer_L(L, P)
            quot, _ = quotient(L.ambient, N, P)
            if strongly_p_embedded(quot, L.p).exists:
                found.append(P)
        logger.info(f"{L.name}: {len(found)} nhóm con essential {[P.order for P in found]}")
        return found

    return L.memo("essentials", compute)


def _splice(parts: Iterable[Sequence[Factor]]) -> Tuple[Factor, ...]:
    # chữ đơn vị có S-giá trị S và tích e nên bỏ đi không đổi S_w hay Pi(w)
    return tuple(f for part in parts for f in part if f[1] != 0)


def _invert(L: Locality, factors: Sequence[Factor]) -> Tuple[Factor, ...]:
    inv = L.ambient.inv
    return tuple((Q, inv(x)) for Q, x in reversed(factors))


class EssentialDecomposer:
    """
    Đệ quy theo |S_g| tăng dần; chứng chỉ con được nhớ trên locality.
    """

    def __init__(self, L: Locality):
        self.L = L
        self.M = L.ambient
        self.supports = {P.mask for P in essentials(L)} | {L.S.mask}

    def factors_of(self, g: int) -> Tuple[Factor, ...]:
        return self.L.memo(("certificate", g), lambda: self._decompose(g))

    def _decompose(self, g: int) -> Tuple[Factor, ...]:
        L, M = self.L, self.M
        P = L.s_of(g)
        if P == L.S:
            return ((L.S, g),)

        Q, h = fully_normalized_rep(L, P)
        Q2, h2 = fully_normalized_rep(L, P.conjugate(g))
        # P và P^g cùng quỹ đạo F nên đại diện (chọn tất định) phải trùng nhau
        if Q != Q2:
            raise InternalInvariantViolation(f"Hai đại diện chuẩn hóa đầy đủ khác nhau trong {L.name}")

        g1 = M.fold((M.inv(h), g, h2))
        head = self.factors_of(h)
        tail = _invert(L, self.factors_of(h2))

        if Q < L.s_of(g1):
            middle: Tuple[Factor, ...] = self.factors_of(g1)
        elif Q.mask in self.supports:
            middle = ((Q, g1),)
        else:
            N = normalizer_L(L, Q)
            X = intersection_generators(M, N, normalizer(M, L.S, Q), Q)
            letters = express_word(M, X, g1)
            middle = _splice(self.factors_of(x) for x in letters)

        factors = _splice((head, middle, tail))
        word = tuple(x for _, x in factors)
        if L.track(word) != P.mask or M.fold(word) != g:
            raise InternalInvariantViolation(
                f"Ghép chứng chỉ cho {M.label(g)} sai S_w hoặc Pi(w) trong {L.name}"
            )
        return factors


def decompose(L: Locality, g: int) -> Certificate:
    L.require(g)
    cert = Certificate(g, EssentialDecomposer(L).factors_of(g))
    logger.debug(f"{L.name}: {L.ambient.label(g)} -> {len(cert.factors)} nhân tử")
    return cert


def verify_certificate(L: Locality, c: Certificate) -> VerificationReport:
    """Kiểm tra mọi bất biến của chứng chỉ, độc lập với cách sinh ra nó"""
    M = L.ambient
    report = VerificationReport(subject=f"certificate {M.label(c.target) if 0 <= c.target < M.order else c.target}")
    if c.target not in L:
        report.fail("target-in-locality", [], "target không thuộc L")
        return report

    supports = {P.mask for P in essentials(L)} | {L.S.mask}
    word = []
    for Q, x in c.factors:
        report.checked += 3
        if x not in L:
            report.fail("factor-normalizes", [M.label(x) if 0 <= x < M.order else str(x)], "x không thuộc L")
            continue
        word.append(x)
        if Q.mask not in supports:
            report.fail("factor-support", Q.generator_labels(), "Q không essential và khác S")
        if Q.conjugate(x) != Q or Q not in L.delta:
            report.fail("factor-normalizes", [M.label(x)], "x không thuộc N_L(Q)")
        if L.s_mask(x) != Q.mask:
            report.fail("factor-s-value", [M.label(x)], f"|S_x| = {L.s_of(x).order}, |Q| = {Q.order}")

    if len(word) == len(c.factors):
        report.checked += 3
        s_w = L.track(word)
        if s_w not in L.delta:
            report.fail("word-domain", [M.label(x) for x in word], "w không thuộc D")
        if s_w != L.s_mask(c.target):
            report.fail("word-s-value", [M.label(x) for x in word], "S_w != S_g")
        if M.fold(word) != c.target:
            report.fail("word-product", [M.label(x) for x in word], "Pi(w) != g")
    return report


def invert_certificate(L: Locality, c: Certificate) -> Certificate:
    if not verify_certificate(L, c).passed:
        raise InvalidInput("Không nghịch đảo được chứng chỉ không hợp lệ")
    return Certificate(L.ambient.inv(c.target), _invert(L, c.factors))


def supported_closure(L: Locality, supports: Iterable[Subgroup]) -> Subgroup:
    """Nhóm con sinh bởi hợp các N_L(Q), Q thuộc supports"""
    gens: List[int] = []
    for Q in supports:
        gens.extend(normalizer_L(L, Q).members)
    return generated_subgroup(L.ambient, gens)


def is_decomposable_over(L: Locality, g: int, supports: Iterable[Subgroup]) -> bool:
    return g in supported_closure(L, supports)


# === JSON ===

def certificate_to_model(L: Locality, c: Certificate) -> CertificateModel:
    M = L.ambient
    return CertificateModel(
        target=M.label(c.target),
        factors=[FactorModel(Q=Q.generator_labels(), x=M.label(x)) for Q, x in c.factors],
    )


def certificate_from_model(L: Locality, model: CertificateModel) -> Certificate:
    M = L.ambient
    try:
        factors = tuple(
            (M.subgroup_from_strings(f.Q), M.parse_element(f.x)) for f in model.factors
        )
        return Certificate(M.parse_element(model.target), factors)
    except ToolkitError as e:
        raise InvalidSpec(f"Chứng chỉ không đọc được: {e}") from e
