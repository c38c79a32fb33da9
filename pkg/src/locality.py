"""
Locality dẫn xuất từ nhóm: L_Delta(M) = {g in M | S ∩ gSg^-1 in Delta}.

Miền D gồm các từ w có S_w thuộc Delta; tích riêng phần Pi là tích trái-sang-phải
trong nhóm xung quanh M.
"""

import logging
import threading
import sys
import pathlib
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from sympy import isprime

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from config.settings import settings
from src.errors import (
    DeltaEmpty, EmptyWord, InternalInvariantViolation, InvalidSpec, NotInDomain, NotInLocality,
    PNotDividing, PNotInDelta, PreconditionViolated, ToolkitError,
)
from src.finite_group import (
    FiniteGroup, GroupHom, Subgroup, all_subgroups, conjugate_mask, generated_subgroup, members_of,
    p_part, sylow,
)
from src.models import ExplicitDeltaSpec, OvergroupsOfSpec, VerificationReport

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
DeltaSpecLike = Union[str, OvergroupsOfSpec, ExplicitDeltaSpec, Dict[str, Any]]

# Số vi phạm tối đa ghi vào một báo cáo
MAX_REPORTED_VIOLATIONS = 100


@dataclass(frozen=True)
class DeltaSet:
    """Tập đối tượng Delta: các nhóm con của S, không trùng, sắp theo (cấp, bitset)"""

    members: Tuple[Subgroup, ...]

    @classmethod
    def of(cls, subgroups: Iterable[Subgroup]) -> "DeltaSet":
        unique = {H.mask: H for H in subgroups}
        return cls(tuple(sorted(unique.values(), key=lambda H: H.sort_key)))

    @cached_property
    def masks(self) -> FrozenSet[int]:
        return frozenset(H.mask for H in self.members)

    def __contains__(self, P: Union[Subgroup, int]) -> bool:
        mask = P if isinstance(P, int) else P.mask
        return mask in self.masks

    def __iter__(self) -> Iterator[Subgroup]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


class Locality:
    """
    Locality (L, Delta, S) dẫn xuất từ nhóm hữu hạn M.

    Bất biến sau khi dựng; chỉ bộ nhớ đệm `memo` được ghi (một lần cho mỗi khóa, có khóa luồng).
    """

    def __init__(
        self,
        ambient: FiniteGroup,
        *,
        p: int,
        S: Subgroup,
        delta: DeltaSet,
        elements: int,
        name: Optional[str] = None,
    ):
        self.ambient = ambient
        self.p = p
        self.S = S
        self.delta = delta
        self.elements = elements
        self.name = name or f"L({ambient.name}, p={p})"

        # S_g = S ∩ gSg^-1 cho mọi g của M
        self._s_masks: List[int] = [
            S.mask & conjugate_mask(ambient, S.mask, ambient.inv(g)) for g in ambient.elements()
        ]
        self._cache: Dict[Any, Any] = {}
        self._lock = threading.Lock()

    # === Truy vấn cơ bản ===

    @property
    def order(self) -> int:
        return self.elements.bit_count()

    @cached_property
    def members(self) -> Tuple[int, ...]:
        return tuple(members_of(self.elements))

    def __contains__(self, g: int) -> bool:
        return 0 <= g < self.ambient.order and bool((self.elements >> g) & 1)

    def s_mask(self, g: int) -> int:
        return self._s_masks[g]

    def s_of(self, g: int) -> Subgroup:
        return Subgroup(self.ambient, self._s_masks[g])

    def require(self, g: int) -> None:
        if g not in self:
            raise NotInLocality(f"{self.ambient.label(g) if 0 <= g < self.ambient.order else g} không thuộc {self.name}")

    def require_delta(self, P: Subgroup) -> None:
        if P not in self.delta:
            raise PNotInDelta(f"Nhóm con {P.generator_labels()} không thuộc Delta của {self.name}")

    def track(self, word: Sequence[int]) -> int:
        """Bitset S_w; từ rỗng cho S"""
        G = self.ambient
        mask = self.S.mask
        pi = 0
        for g in word:
            mask &= conjugate_mask(G, self._s_masks[g], G.inv(pi))
            pi = G.mul(pi, g)
        return mask

    # === Bộ nhớ đệm ===

    def memo(self, key: Any, factory: Callable[[], Any]) -> Any:
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = factory()
        with self._lock:
            return self._cache.setdefault(key, value)

    def __repr__(self) -> str:
        return f"Locality({self.name!r}, |L|={self.order}, |S|={self.S.order}, |Delta|={len(self.delta)})"


# === Dựng locality ===

def _resolve_delta_spec(M: FiniteGroup, S: Subgroup, subs: List[Subgroup], spec: DeltaSpecLike) -> List[Subgroup]:
    if isinstance(spec, dict):
        if "overgroups_of" in spec:
            spec = OvergroupsOfSpec(**spec)
        elif "explicit" in spec:
            spec = ExplicitDeltaSpec(**spec)
        else:
            raise InvalidSpec(f"Delta spec không hợp lệ: {spec}")

    if spec == "all":
        return list(subs)
    if spec == "nontrivial":
        return [H for H in subs if H.order > 1]
    if isinstance(spec, OvergroupsOfSpec):
        base = M.subgroup_from_strings(spec.overgroups_of)
        return [H for H in subs if base <= H]
    if isinstance(spec, ExplicitDeltaSpec):
        chosen = []
        for gens in spec.explicit:
            H = M.subgroup_from_strings(gens)
            if not H <= S:
                raise InvalidSpec(f"Nhóm con sinh bởi {gens} không nằm trong S")
            chosen.append(H)
        return chosen
    raise InvalidSpec(f"Delta spec không hợp lệ: {spec!r}")


def _elements_for(M: FiniteGroup, s_masks: List[int], masks: FrozenSet[int]) -> int:
    return sum(1 << g for g in M.elements() if s_masks[g] in masks)


def build_group_locality(
    M: FiniteGroup,
    p: int,
    delta_spec: DeltaSpecLike = "all",
    *,
    S: Optional[Subgroup] = None,
) -> Locality:
    """
    Dựng L_Delta(M).

    Delta được đóng (tới điểm bất động) dưới nhóm con lớn hơn trong S và dưới liên hợp
    bởi L hiện tại; L được tính lại sau mỗi vòng.
    """
    if not isprime(p):
        raise InvalidSpec(f"{p} không phải số nguyên tố")
    if M.order % p:
        raise PNotDividing(f"{p} không chia hết |{M.name}| = {M.order}")

    if S is None:
        S = sylow(M, M.whole, p)
    elif generated_subgroup(M, S.members).mask != S.mask or S.order != p_part(M.order, p):
        raise InvalidSpec(f"S cho trước (cấp {S.order}) không phải p-nhóm con Sylow của {M.name}")

    subs = all_subgroups(M, within=S)
    current = {H.mask for H in _resolve_delta_spec(M, S, subs, delta_spec)}
    s_masks = [S.mask & conjugate_mask(M, S.mask, M.inv(g)) for g in M.elements()]

    rounds = 0
    while True:
        rounds += 1
        grown = set(current)
        for H in subs:
            if any(P & ~H.mask == 0 for P in current):
                grown.add(H.mask)
        elements = _elements_for(M, s_masks, frozenset(grown))
        for g in members_of(elements):
            for P in list(grown):
                if P & ~s_masks[g] == 0:
                    grown.add(conjugate_mask(M, P, g))
        if grown == current:
            break
        current = grown

    if not current:
        raise DeltaEmpty(f"Delta rỗng sau khi đóng trong {M.name}")

    delta = DeltaSet.of(Subgroup(M, m) for m in current)
    elements = _elements_for(M, s_masks, delta.masks)
    L = Locality(M, p=p, S=S, delta=delta, elements=elements)
    logger.info(f"Đã dựng {L.name}: |L|={L.order}, |S|={S.order}, |Delta|={len(delta)} sau {rounds} vòng")
    return L


# === Phép toán trên từ ===

def _check_word(L: Locality, w: Sequence[int]) -> None:
    for g in w:
        L.require(g)


def s_of_word(L: Locality, w: Sequence[int]) -> Subgroup:
    """S_w: s thuộc S_w khi s in S_{g1} và s^{g1} in S_{(g2, ...)}"""
    if not w:
        raise EmptyWord("S_w không xác định cho từ rỗng")
    _check_word(L, w)
    return Subgroup(L.ambient, L.track(w))


def in_domain(L: Locality, w: Sequence[int]) -> bool:
    """w in D khi S_w in Delta; từ rỗng luôn thuộc D (S_() = S)"""
    _check_word(L, w)
    return L.track(w) in L.delta


def product(L: Locality, w: Sequence[int]) -> int:
    if not in_domain(L, w):
        raise NotInDomain(
            f"Từ {[L.ambient.label(g) for g in w]} không thuộc miền của {L.name}"
        )
    return L.ambient.fold(w)


def normalizer_L(L: Locality, P: Subgroup) -> Subgroup:
    """N_L(P) = {g in L | P <= S_g, P^g = P}"""
    L.require_delta(P)

    def compute() -> Subgroup:
        M = L.ambient
        mask = 0
        for g in L.members:
            if P.mask & ~L.s_mask(g) == 0 and conjugate_mask(M, P.mask, g) == P.mask:
                mask |= 1 << g
        N = Subgroup(M, mask)
        if generated_subgroup(M, N.members).mask != mask:
            raise InternalInvariantViolation(f"N_L(P) không đóng dưới phép nhân trong {L.name}")
        return N

    return L.memo(("normalizer", P.mask), compute)


def conjugation_isomorphism(L: Locality, g: int, P: Subgroup) -> GroupHom:
    """c_g: N_L(P) -> N_L(P^g), h -> g^-1 h g"""
    L.require(g)
    if P not in L.delta or P.mask & ~L.s_mask(g):
        raise PreconditionViolated(f"Cần P in Delta và P <= S_g cho c_g trong {L.name}")
    Pg = P.conjugate(g)
    if Pg not in L.delta:
        raise PreconditionViolated(f"P^g không thuộc Delta của {L.name}")

    M = L.ambient
    source = normalizer_L(L, P)
    target = normalizer_L(L, Pg)
    hom = GroupHom(source, M, tuple(M.conj(h, g) for h in source.members))
    if hom.image().mask != target.mask or not hom.is_injective() or not hom.is_homomorphism():
        raise InternalInvariantViolation(f"c_g không phải đẳng cấu N_L(P) -> N_L(P^g) trong {L.name}")
    return hom


# === Kiểm tra tiên đề ===

def _words_in_domain(L: Locality, max_len: int) -> Iterator[Tuple[Word, int]]:
    """Duyệt DFS các từ thuộc D, độ dài <= max_len; mở rộng của từ ngoài D không bao giờ quay lại D"""
    M = L.ambient
    masks = L.delta.masks
    stack: List[Tuple[Word, int, int]] = [((), L.S.mask, 0)]
    while stack:
        word, mask, pi = stack.pop()
        if word:
            yield word, mask
        if len(word) == max_len:
            continue
        for g in reversed(L.members):
            nxt = mask & conjugate_mask(M, L.s_mask(g), M.inv(pi))
            if nxt in masks:
                stack.append((word + (g,), nxt, M.mul(pi, g)))


def verify_axioms(L: Locality, max_len: Optional[int] = None) -> VerificationReport:
    """
    Kiểm tra có giới hạn rằng (L, Delta, S) là locality.

    Các mệnh đề: unit, subword, splicing, inversion, s-monotone, s-inverse, domain-delta,
    delta-overgroup, delta-conjugation, sylow-maximal. Không ném lỗi; mọi vi phạm nằm trong báo cáo.
    """
    max_len = settings.verify_max_len if max_len is None else max_len
    if max_len < 3:
        raise InvalidSpec(f"max_len phải >= 3, nhận {max_len}")

    M = L.ambient
    S = L.S
    masks = L.delta.masks
    report = VerificationReport(subject=L.name)
    label = M.label

    def fail(clause: str, word: Sequence[int], detail: str = "") -> None:
        if len(report.violations) < MAX_REPORTED_VIOLATIONS:
            report.fail(clause, [label(g) for g in word], detail)
        else:
            report.passed = False

    # Từng phần tử
    if 0 not in L:
        fail("unit", (0,), "e không thuộc L")
    for s in S.members:
        report.checked += 1
        if s not in L:
            fail("domain-delta", (s,), "S không nằm trong L")
    for g in M.elements():
        report.checked += 1
        if (L.s_mask(g) in masks) != (g in L):
            fail("domain-delta", (g,), "thành viên của L phải tương đương S_g in Delta")
    for g in L.members:
        report.checked += 3
        for word in ((g, 0), (0, g)):
            if L.track(word) not in masks or M.fold(word) != g:
                fail("unit", word, "tích với e phải bằng g")
        g_inv = M.inv(g)
        if g_inv not in L:
            fail("inversion", (g,), "L không đóng dưới nghịch đảo")
        elif L.s_mask(g_inv) != conjugate_mask(M, L.s_mask(g), g):
            fail("s-inverse", (g,), "S_{g^-1} != (S_g)^g")

    # Các từ thuộc D
    for word, mask in _words_in_domain(L, max_len):
        n = len(word)
        total = M.fold(word)

        report.checked += 1
        if total not in L:
            fail("s-monotone", word, "Pi(w) không thuộc L")
        elif mask & ~L.s_mask(total):
            fail("s-monotone", word, "S_w không nằm trong S_{Pi(w)}")

        report.checked += 1
        inverse_word = tuple(M.inv(g) for g in reversed(word))
        if any(x not in L for x in inverse_word):
            fail("inversion", word, "w^-1 chứa phần tử ngoài L")
        else:
            doubled = inverse_word + word
            if L.track(doubled) not in masks or M.fold(doubled) != 0:
                fail("inversion", word, "w^-1 w phải thuộc D với tích e")

        for i in range(n):
            for j in range(i + 1, n + 1):
                sub = word[i:j]
                report.checked += 1
                if L.track(sub) not in masks:
                    fail("subword", word, f"từ con [{i}:{j}] không thuộc D")
                    continue
                if j - i < 2:
                    continue
                spliced = word[:i] + (M.fold(sub),) + word[j:]
                report.checked += 1
                if spliced[i] not in L:
                    fail("splicing", word, f"Pi(w[{i}:{j}]) không thuộc L")
                elif L.track(spliced) not in masks or M.fold(spliced) != total:
                    fail("splicing", word, f"thay w[{i}:{j}] bằng tích làm đổi miền hoặc tích")

    # Tính đóng của Delta
    subs = all_subgroups(M, within=S) if M.order <= settings.max_group_order else []
    for P in L.delta:
        for H in subs:
            report.checked += 1
            if P <= H and H not in L.delta:
                fail("delta-overgroup", tuple(H.generators()), "nhóm con lớn hơn của một phần tử Delta không thuộc Delta")
        for g in L.members:
            if P.mask & ~L.s_mask(g) == 0:
                report.checked += 1
                if conjugate_mask(M, P.mask, g) not in masks:
                    fail("delta-conjugation", (g,), f"P^g không thuộc Delta (|P| = {P.order})")

    # S là p-nhóm con cực đại của L
    report.checked += 1
    try:
        N = normalizer_L(L, S)
        if p_part(N.order, L.p) != S.order:
            fail("sylow-maximal", tuple(N.generators()), f"|N_L(S)|_p = {p_part(N.order, L.p)} != |S|")
    except ToolkitError as e:
        fail("sylow-maximal", (), str(e))

    logger.info(
        f"Kiểm tra tiên đề {L.name} (max_len={max_len}): {report.checked} mệnh đề, "
        f"{len(report.violations)} vi phạm"
    )
    return report
