"""
Nền tảng nhóm hữu hạn: bảng Cayley, nhóm con dạng bitset, chuẩn hóa tử, Sylow,
nhóm thương và liệt kê toàn bộ dàn nhóm con ở quy mô nhỏ.

Quy ước:
  - phần tử là chỉ số 0..n-1, chỉ số 0 là đơn vị;
  - tích a*b nghĩa là "áp dụng a trước rồi b" (quy ước GAP), nên s^g = g^-1 s g;
  - nhóm con là bitset Python int trên các chỉ số phần tử.
"""

import logging
import re
import sys
import pathlib
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint, isprime
from sympy.combinatorics import Permutation

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from config.settings import settings
from src.errors import (
    GroupTooLarge, InternalInvariantViolation, InvalidSpec, NotConjugatable, NotNormal,
)

logger = logging.getLogger(__name__)

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def members_of(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def p_part(n: int, p: int) -> int:
    """Lũy thừa lớn nhất của p chia hết n"""
    return p ** factorint(n).get(p, 0)


def is_p_power(n: int, p: int) -> bool:
    return n == p_part(n, p)


def cycle_label(array_form: Sequence[int]) -> str:
    """Chuỗi chu trình 1-based, ví dụ "(1 2 3)(4 5)"; đơn vị là "()" """
    cycles = Permutation(list(array_form)).cyclic_form
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(i + 1) for i in cycle) + ")" for cycle in cycles)


def parse_cycles(text: str, degree: int) -> Tuple[int, ...]:
    """
    Đọc chuỗi chu trình (điểm 1-based, cách nhau bởi khoảng trắng) thành array form 0-based.

    Các chu trình được nhân từ trái sang phải, nên "(1 2)(1 3)" là tích của hai phép chuyển vị.
    """
    stripped = text.strip()
    if not stripped or _CYCLE_RE.sub("", stripped).strip():
        raise InvalidSpec(f"Không đọc được chuỗi chu trình: {text!r}")

    result = Permutation(list(range(degree)))
    for body in _CYCLE_RE.findall(stripped):
        tokens = body.replace(",", " ").split()
        if not tokens:
            continue
        try:
            points = [int(t) - 1 for t in tokens]
        except ValueError:
            raise InvalidSpec(f"Điểm không hợp lệ trong {text!r}")
        if any(x < 0 or x >= degree for x in points) or len(set(points)) != len(points):
            raise InvalidSpec(f"Chu trình {body!r} không hợp lệ trên {degree} điểm")
        if len(points) > 1:
            result = result * Permutation([points], size=degree)
    return tuple(result.array_form)


class FiniteGroup:
    """
    Nhóm hữu hạn lưu bằng bảng Cayley đầy đủ (cấp <= max_group_order)
    """

    def __init__(
        self,
        table,
        *,
        name: str = "G",
        labels: Optional[Sequence[str]] = None,
        points: Optional[np.ndarray] = None,
        validate: bool = True,
    ):
        table = np.array(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise InvalidSpec(f"Bảng Cayley của {name} phải là ma trận vuông khác rỗng")
        if table.min() < 0 or table.max() >= table.shape[0]:
            raise InvalidSpec(f"Bảng Cayley của {name} chứa chỉ số ngoài phạm vi")

        self.name = name
        self.order = int(table.shape[0])
        self.table = table
        self.table.setflags(write=False)
        self._rows: List[List[int]] = table.tolist()

        # inverse[a] là cột b đầu tiên với a*b = e
        self.inverse = np.argmax(table == 0, axis=1).astype(np.int64)
        self.inverse.setflags(write=False)
        self._inv: List[int] = self.inverse.tolist()

        if labels is not None and len(labels) != self.order:
            raise InvalidSpec(f"Số nhãn ({len(labels)}) khác cấp nhóm ({self.order})")
        self.labels: Optional[List[str]] = list(labels) if labels is not None else None
        self._label_index: Dict[str, int] = (
            {label: i for i, label in enumerate(self.labels)} if self.labels else {}
        )

        # Ảnh của các điểm (0-based) khi nhóm đến từ phép hoán vị
        self.points = points
        self._point_index: Dict[Tuple[int, ...], int] = (
            {tuple(row): i for i, row in enumerate(points.tolist())} if points is not None else {}
        )

        if validate:
            if self.order > settings.max_group_order:
                raise GroupTooLarge(
                    f"{name} có cấp {self.order} > {settings.max_group_order}, không kiểm tra được tiên đề"
                )
            problems = check_group_axioms(self)
            if problems:
                raise InvalidSpec(f"Bảng Cayley của {name} không phải nhóm: {problems[0]}")

    # === Dựng nhóm ===

    @classmethod
    def from_permutations(cls, generators: Sequence[Tuple[int, ...]], degree: int, *, name: str = "G"):
        """
        Sinh nhóm hoán vị từ các phần tử sinh (array form 0-based) bằng BFS từ đơn vị.

        Thứ tự phần tử là thứ tự BFS (nhân phải với từng phần tử sinh), nên luôn tất định.
        """
        identity = tuple(range(degree))
        gens = [tuple(g) for g in generators if tuple(g) != identity]
        elements = [identity]
        index = {identity: 0}
        queue = deque([identity])
        while queue:
            x = queue.popleft()
            for s in gens:
                y = tuple(s[i] for i in x)
                if y not in index:
                    if len(elements) >= settings.max_group_order:
                        raise GroupTooLarge(f"{name} vượt quá cấp {settings.max_group_order}")
                    index[y] = len(elements)
                    elements.append(y)
                    queue.append(y)

        points = np.array(elements, dtype=np.int64).reshape(len(elements), degree)
        n = len(elements)
        table = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            # hàng a: (a*b)(i) = b(a(i))
            products = points[:, points[a]] if degree else points
            table[a] = [index[tuple(row)] for row in products.tolist()]

        labels = [cycle_label(e) if degree else "()" for e in elements]
        logger.debug(f"Đã dựng nhóm hoán vị {name} cấp {n} trên {degree} điểm")
        return cls(table, name=name, labels=labels, points=points, validate=False)

    @classmethod
    def from_cycle_strings(cls, generators: Sequence[str], degree: int, *, name: str = "G"):
        return cls.from_permutations([parse_cycles(g, degree) for g in generators], degree, name=name)

    # === Phép toán cơ bản ===

    def mul(self, a: int, b: int) -> int:
        return self._rows[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def conj(self, s: int, g: int) -> int:
        """s^g = g^-1 s g"""
        rows = self._rows
        return rows[rows[self._inv[g]][s]][g]

    def power(self, a: int, k: int) -> int:
        result = 0
        for _ in range(k):
            result = self._rows[result][a]
        return result

    def fold(self, word: Iterable[int]) -> int:
        result = 0
        for x in word:
            result = self._rows[result][x]
        return result

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self._rows[x][a]
            k += 1
        return k

    @cached_property
    def is_abelian(self) -> bool:
        return bool((self.table == self.table.T).all())

    def elements(self) -> range:
        return range(self.order)

    # === Nhãn ===

    @property
    def degree(self) -> int:
        return 0 if self.points is None else int(self.points.shape[1])

    def label(self, a: int) -> str:
        if self.labels is not None:
            return self.labels[a]
        return f"g{a}"

    def parse_element(self, text: str) -> int:
        """Chỉ số của phần tử cho bởi chuỗi chu trình (hoặc nhãn)"""
        if text in self._label_index:
            return self._label_index[text]
        if self.points is not None:
            key = parse_cycles(text, self.degree)
            if key in self._point_index:
                return self._point_index[key]
            raise InvalidSpec(f"{text!r} không thuộc nhóm {self.name}")
        raise InvalidSpec(f"Không nhận ra phần tử {text!r} trong {self.name}")

    # === Nhóm con ===

    def subgroup(self, mask: int) -> "Subgroup":
        return Subgroup(self, mask)

    @cached_property
    def trivial(self) -> "Subgroup":
        return Subgroup(self, 1)

    @cached_property
    def whole(self) -> "Subgroup":
        return Subgroup(self, (1 << self.order) - 1)

    def subgroup_from_strings(self, generators: Sequence[str]) -> "Subgroup":
        return generated_subgroup(self, [self.parse_element(g) for g in generators])

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"


@dataclass(frozen=True)
class Subgroup:
    """Nhóm con dạng bitset trên chỉ số phần tử của một FiniteGroup cố định"""

    parent: FiniteGroup = field(compare=False, repr=False)
    mask: int

    @property
    def order(self) -> int:
        return self.mask.bit_count()

    @cached_property
    def members(self) -> Tuple[int, ...]:
        return tuple(members_of(self.mask))

    def __contains__(self, a: int) -> bool:
        return bool((self.mask >> a) & 1)

    def __le__(self, other: "Subgroup") -> bool:
        return self.mask & ~other.mask == 0

    def __lt__(self, other: "Subgroup") -> bool:
        return self.mask != other.mask and self.mask & ~other.mask == 0

    def __and__(self, other: "Subgroup") -> "Subgroup":
        return Subgroup(self.parent, self.mask & other.mask)

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.order, self.mask)

    def conjugate(self, g: int) -> "Subgroup":
        return Subgroup(self.parent, conjugate_mask(self.parent, self.mask, g))

    def labels(self) -> List[str]:
        return [self.parent.label(x) for x in self.members]

    def generators(self) -> List[int]:
        return subgroup_generators(self.parent, self)

    def generator_labels(self) -> List[str]:
        return [self.parent.label(x) for x in self.generators()]


@dataclass(frozen=True)
class GroupHom:
    """Đồng cấu từ một nhóm con vào nhóm đích; images theo thứ tự source.members"""

    source: Subgroup
    target: FiniteGroup = field(repr=False)
    images: Tuple[int, ...]

    @cached_property
    def mapping(self) -> Dict[int, int]:
        return dict(zip(self.source.members, self.images))

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def image(self) -> Subgroup:
        return Subgroup(self.target, mask_of(self.images))

    def is_homomorphism(self) -> bool:
        src, tgt, f = self.source.parent, self.target, self.mapping
        return all(
            f[src.mul(a, b)] == tgt.mul(f[a], f[b])
            for a in self.source.members
            for b in self.source.members
        )

    def is_injective(self) -> bool:
        return len(set(self.images)) == len(self.images)


# === Các phép toán của module ===

def _check_index(G: FiniteGroup, *elements: int) -> None:
    for x in elements:
        if not 0 <= x < G.order:
            raise IndexError(f"Phần tử {x} ngoài phạm vi 0..{G.order - 1} của {G.name}")


def multiply(G: FiniteGroup, a: int, b: int) -> int:
    _check_index(G, a, b)
    return G.mul(a, b)


def conjugate(G: FiniteGroup, s: int, g: int) -> int:
    """s^g = g^-1 s g"""
    _check_index(G, s, g)
    return G.conj(s, g)


def conjugate_mask(G: FiniteGroup, mask: int, g: int) -> int:
    if g == 0 or mask <= 1:
        return mask
    idx = np.fromiter(members_of(mask), dtype=np.int64)
    images = G.table[G.table[G.inverse[g], idx], g]
    return mask_of(images.tolist())


def generated_subgroup(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    """Nhóm con nhỏ nhất chứa gens, bằng bao đóng BFS"""
    gens = list(dict.fromkeys(int(x) for x in gens if x != 0))
    _check_index(G, *gens)
    rows = G._rows
    seen = 1
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            row = rows[x]
            for s in gens:
                y = row[s]
                if not (seen >> y) & 1:
                    seen |= 1 << y
                    nxt.append(y)
        frontier = nxt
    return Subgroup(G, seen)


def subgroup_generators(G: FiniteGroup, H: Subgroup) -> List[int]:
    """Tập sinh tham lam, tất định: duyệt theo chỉ số, giữ phần tử chưa nằm trong nhóm đã sinh"""
    gens: List[int] = []
    current = 1
    for x in H.members:
        if not (current >> x) & 1:
            gens.append(x)
            current = generated_subgroup(G, gens).mask
            if current == H.mask:
                break
    return gens


def normalizer(G: FiniteGroup, A: Subgroup, P: Subgroup) -> Subgroup:
    """{a in A | P^a = P}"""
    return Subgroup(G, mask_of(a for a in A.members if conjugate_mask(G, P.mask, a) == P.mask))


def centralizer(G: FiniteGroup, A: Subgroup, P: Subgroup) -> Subgroup:
    rows = G._rows
    gens = subgroup_generators(G, P)
    return Subgroup(G, mask_of(a for a in A.members if all(rows[a][x] == rows[x][a] for x in gens)))


def sylow(G: FiniteGroup, H: Subgroup, p: int) -> Subgroup:
    """
    p-nhóm con Sylow tất định của H.

    Bắt đầu từ nhóm tầm thường; mỗi bước lấy phần tử x đầu tiên (theo chỉ số) trong
    N_H(T) \\ T với x^p thuộc T, rồi thay T bằng <T, x> (cấp tăng đúng p lần).
    """
    if not isprime(p):
        raise InvalidSpec(f"{p} không phải số nguyên tố")
    target = p_part(H.order, p)
    T = G.trivial
    gens: List[int] = []
    while T.order < target:
        N = normalizer(G, H, T)
        for x in N.members:
            if x in T:
                continue
            if G.power(x, p) in T:
                gens.append(x)
                T = generated_subgroup(G, gens)
                break
        else:
            raise InternalInvariantViolation(f"Không mở rộng được p-nhóm cấp {T.order} trong {G.name}")
    return T


def sylow_conjugator(G: FiniteGroup, H: Subgroup, P: Subgroup, T: Subgroup) -> int:
    """n in H đầu tiên (theo chỉ số) với P^n <= T"""
    for n in H.members:
        if conjugate_mask(G, P.mask, n) & ~T.mask == 0:
            return n
    raise NotConjugatable(
        f"Không có phần tử của H liên hợp P (cấp {P.order}) vào T (cấp {T.order}) trong {G.name}"
    )


def all_subgroups(
    G: FiniteGroup, within: Optional[Subgroup] = None, *, bound: Optional[int] = None
) -> List[Subgroup]:
    """
    Toàn bộ nhóm con (của `within`, mặc định là G): gieo bằng nhóm con cyclic rồi
    đóng dưới phép join từng cặp. Sắp xếp theo (cấp, bitset).
    """
    bound = bound if bound is not None else settings.max_group_order
    if G.order > bound:
        raise GroupTooLarge(f"{G.name} có cấp {G.order} > giới hạn {bound}")
    universe = within if within is not None else G.whole

    gens_of: Dict[int, Tuple[int, ...]] = {}
    for x in universe.members:
        mask = generated_subgroup(G, [x]).mask
        gens_of.setdefault(mask, (x,) if x else ())

    frontier = list(gens_of)
    while frontier:
        fresh = []
        for a in frontier:
            for b in list(gens_of):
                if a & ~b == 0 or b & ~a == 0:
                    continue
                gens = gens_of[a] + gens_of[b]
                joined = generated_subgroup(G, gens).mask
                if joined not in gens_of:
                    gens_of[joined] = gens
                    fresh.append(joined)
        frontier = fresh

    result = sorted((Subgroup(G, m) for m in gens_of), key=lambda H: H.sort_key)
    logger.debug(f"{G.name}: {len(result)} nhóm con")
    return result


def quotient(G: FiniteGroup, H: Subgroup, N: Subgroup) -> Tuple[FiniteGroup, Dict[int, int]]:
    """
    Nhóm thương H/N trên các lớp kề; lớp của đơn vị có chỉ số 0.

    Returns:
        (nhóm thương, projection: phần tử của H -> chỉ số lớp kề)
    """
    if not N <= H or normalizer(G, H, N).mask != H.mask:
        raise NotNormal(f"Nhóm con cấp {N.order} không chuẩn tắc trong nhóm con cấp {H.order}")
    rows = G._rows
    projection: Dict[int, int] = {}
    reps: List[int] = []
    for h in H.members:
        if h in projection:
            continue
        for n in N.members:
            projection[rows[n][h]] = len(reps)
        reps.append(h)
    table = [[projection[rows[a][b]] for b in reps] for a in reps]
    labels = [f"[{G.label(r)}]" for r in reps]
    Q = FiniteGroup(table, name=f"{G.name}:{H.order}/{N.order}", labels=labels, validate=False)
    return Q, projection


def check_group_axioms(G: FiniteGroup) -> List[str]:
    """Kiểm tra vét cạn: đơn vị, nghịch đảo hai phía, kết hợp"""
    T = G.table
    n = G.order
    ar = np.arange(n)
    problems: List[str] = []
    bad = np.nonzero((T[0] != ar) | (T[:, 0] != ar))[0]
    if bad.size:
        problems.append(f"đơn vị hỏng tại phần tử {int(bad[0])}")
    inv = G.inverse
    bad = np.nonzero((T[ar, inv] != 0) | (T[inv, ar] != 0))[0]
    if bad.size:
        problems.append(f"không có nghịch đảo hai phía cho phần tử {int(bad[0])}")
    lhs = T[T, :]
    rhs = T[:, T]
    bad = np.argwhere(lhs != rhs)
    if bad.size:
        a, b, c = (int(v) for v in bad[0])
        problems.append(f"không kết hợp tại ({a},{b},{c})")
    return problems


def fingerprint(G: FiniteGroup) -> Tuple[int, Tuple[Tuple[int, int], ...], bool]:
    """(cấp, histogram cấp phần tử, giao hoán) - đủ để phân biệt các nhóm nhỏ trong test"""
    hist = Counter(G.element_order(a) for a in G.elements())
    return G.order, tuple(sorted(hist.items())), G.is_abelian
