"""
Hệ fusion F_S(L) ở mức cần cho định lý phân tích: Delta-liên hợp kèm nhân chứng,
đại diện chuẩn hóa đầy đủ, Hom_F ở quy mô nhỏ và tính centric.
"""

import logging
import sys
import pathlib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from config.settings import settings
from src.errors import InternalInvariantViolation, SBoundExceeded
from src.finite_group import Subgroup, centralizer, conjugate_mask, mask_of, normalizer, sylow_conjugator
from src.locality import Locality, Word, normalizer_L

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FusionMorphism:
    """Đơn cấu P -> S trong F_S(L); images theo thứ tự domain.members"""

    domain: Subgroup
    images: Tuple[int, ...]
    witness: Word = field(default=(), compare=False)

    @cached_property
    def image_of(self) -> Dict[int, int]:
        return dict(zip(self.domain.members, self.images))

    def image(self) -> Subgroup:
        return Subgroup(self.domain.parent, mask_of(self.images))

    def then(self, other: "FusionMorphism") -> "FusionMorphism":
        """self rồi other (other.domain phải chứa ảnh của self)"""
        f = other.image_of
        return FusionMorphism(self.domain, tuple(f[y] for y in self.images), self.witness + other.witness)


def delta_conjugates(L: Locality, P: Subgroup) -> List[Tuple[Subgroup, int]]:
    """
    Quỹ đạo P^F trong Delta: các cặp (Q, g) với g in L, P <= S_g, P^g = Q.

    Mỗi Q giữ nhân chứng g đầu tiên theo thứ tự chỉ số.
    """
    L.require_delta(P)

    def compute() -> List[Tuple[Subgroup, int]]:
        M = L.ambient
        seen: Dict[int, int] = {}
        for g in L.members:
            if P.mask & ~L.s_mask(g) == 0:
                seen.setdefault(conjugate_mask(M, P.mask, g), g)
        return [(Subgroup(M, q), g) for q, g in seen.items()]

    return L.memo(("orbit", P.mask), compute)


def _normalizer_in_S(L: Locality, P: Subgroup) -> Subgroup:
    return L.memo(("N_S", P.mask), lambda: normalizer(L.ambient, L.S, P))


def is_fully_normalized(L: Locality, P: Subgroup) -> bool:
    size = _normalizer_in_S(L, P).order
    return all(size >= _normalizer_in_S(L, Q).order for Q, _ in delta_conjugates(L, P))


def fully_normalized_rep(L: Locality, P: Subgroup) -> Tuple[Subgroup, int]:
    """
    (Q, h) với Q chuẩn hóa đầy đủ trong quỹ đạo, P^h = Q và N_S(P)^h <= N_S(Q).

    Chọn Q có |N_S(Q)| lớn nhất, hòa thì bitset nhỏ nhất; h = f * n với f là nhân chứng
    quỹ đạo và n liên hợp N_S(P)^f vào N_S(Q) bên trong N_L(Q).
    """
    orbit = delta_conjugates(L, P)

    def compute() -> Tuple[Subgroup, int]:
        M = L.ambient
        Q, f = min(orbit, key=lambda pair: (-_normalizer_in_S(L, pair[0]).order, pair[0].mask))
        NSP = _normalizer_in_S(L, P)
        NSQ = _normalizer_in_S(L, Q)
        n = sylow_conjugator(M, normalizer_L(L, Q), NSP.conjugate(f), NSQ)
        h = M.mul(f, n)
        if conjugate_mask(M, P.mask, h) != Q.mask or not NSP.conjugate(h) <= NSQ or h not in L:
            raise InternalInvariantViolation(f"fully_normalized_rep sai hậu điều kiện trong {L.name}")
        return Q, h

    return L.memo(("fully_normalized", P.mask), compute)


def hom_F(
    L: Locality, P: Subgroup, Q: Subgroup, *, max_sylow_order: Optional[int] = None
) -> List[FusionMorphism]:
    """
    Mọi đơn cấu P -> Q là hợp của các hạn chế c_g: S_g -> (S_g)^g.

    Bao đóng BFS trên các ánh xạ P -> S, bắt đầu từ phép nhúng.
    """
    bound = settings.max_sylow_order_for_hom if max_sylow_order is None else max_sylow_order
    if L.S.order > bound:
        raise SBoundExceeded(f"|S| = {L.S.order} > {bound}, không liệt kê Hom_F")

    M = L.ambient
    start = FusionMorphism(P, P.members)
    seen: Dict[Tuple[int, ...], FusionMorphism] = {start.images: start}
    queue = deque([start])
    while queue:
        phi = queue.popleft()
        image_mask = mask_of(phi.images)
        for g in L.members:
            if image_mask & ~L.s_mask(g):
                continue
            images = tuple(M.conj(y, g) for y in phi.images)
            if images not in seen:
                nxt = FusionMorphism(P, images, phi.witness + (g,))
                seen[images] = nxt
                queue.append(nxt)

    result = [phi for phi in seen.values() if mask_of(phi.images) & ~Q.mask == 0]
    logger.debug(f"Hom_F(|P|={P.order}, |Q|={Q.order}) trong {L.name}: {len(result)} đơn cấu")
    return result


def is_centric(L: Locality, P: Subgroup) -> bool:
    """C_S(Q) <= Q với mọi Q trong quỹ đạo của P"""
    M = L.ambient
    return all(centralizer(M, L.S, Q) <= Q for Q, _ in delta_conjugates(L, P))
