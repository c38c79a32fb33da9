"""
Transporter category T_Delta(L) và T_S^Delta(G), tiểu phạm trù T-essential, phân tích
cấu xạ, hàm tử phản biến giá trị nhóm abel hữu hạn và giới hạn ngược của chúng.

Quy ước phản biến: cấu xạ g: P -> Q cho ma trận F(Q) -> F(P), và
matrix(g h) = matrix(g) @ matrix(h).
"""

import logging
import sys
import pathlib
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from src.abelian import AbPres, FiniteSubgroupPres, fixed_subgroup, subgroup_of_solutions
from src.alperin import decompose
from src.errors import ActionInvalid, FunctorInconsistent, InvalidInput, InvalidSpec, NotAMorphism
from src.finite_group import FiniteGroup, Subgroup, conjugate_mask, is_p_power, normalizer, p_part, quotient
from src.locality import DeltaSpecLike, Locality, build_group_locality
from src.models import FunctorSpec
from src.p_embedding import strongly_p_embedded

if TYPE_CHECKING:
    from src.cohomology import GModule

logger = logging.getLogger(__name__)

MorphismKey = Tuple[int, int]


class TransporterCat:
    """
    Phạm trù hữu hạn: đối tượng là nhóm con của S, Mor(P_i, P_j) là tuple phần tử tăng dần.

    Hợp thành là tích trong nhóm xung quanh.
    """

    def __init__(
        self,
        ambient: FiniteGroup,
        *,
        S: Subgroup,
        p: int,
        objects: Sequence[Subgroup],
        morphisms: Dict[MorphismKey, Tuple[int, ...]],
        locality: Optional[Locality] = None,
        name: str = "T",
    ):
        self.ambient = ambient
        self.S = S
        self.p = p
        self.objects: Tuple[Subgroup, ...] = tuple(objects)
        self._mor = {key: tuple(value) for key, value in morphisms.items() if value}
        self.locality = locality
        self.name = name
        self._index = {P.mask: i for i, P in enumerate(self.objects)}

    def index_of(self, P: Subgroup) -> int:
        if P.mask not in self._index:
            raise InvalidInput(f"Nhóm con {P.generator_labels()} không phải đối tượng của {self.name}")
        return self._index[P.mask]

    def mor(self, i: int, j: int) -> Tuple[int, ...]:
        return self._mor.get((i, j), ())

    def hom(self, P: Subgroup, Q: Subgroup) -> Tuple[int, ...]:
        return self.mor(self.index_of(P), self.index_of(Q))

    @cached_property
    def _positions(self) -> Dict[MorphismKey, Dict[int, int]]:
        return {key: {g: k for k, g in enumerate(elems)} for key, elems in self._mor.items()}

    def position(self, i: int, j: int, g: int) -> int:
        try:
            return self._positions[(i, j)][g]
        except KeyError:
            raise NotAMorphism(
                f"{self.ambient.label(g)} không phải cấu xạ {i} -> {j} trong {self.name}"
            ) from None

    def automorphisms(self, i: int) -> Subgroup:
        mask = 0
        for g in self.mor(i, i):
            mask |= 1 << g
        return Subgroup(self.ambient, mask)

    def pairs(self) -> List[MorphismKey]:
        return sorted(self._mor)

    def morphisms(self) -> Iterator[Tuple[int, int, int]]:
        for (i, j) in self.pairs():
            for g in self._mor[(i, j)]:
                yield i, j, g

    @property
    def morphism_count(self) -> int:
        return sum(len(v) for v in self._mor.values())

    def morphism_id(self, i: int, j: int, g: int) -> str:
        return f"{i}:{j}:{self.ambient.label(g)}"

    def __repr__(self) -> str:
        return f"TransporterCat({self.name!r}, objects={len(self.objects)}, morphisms={self.morphism_count})"


@dataclass(frozen=True)
class TransporterFactor:
    """Hạn chế của x in Aut_T(support) thành cấu xạ source -> target"""

    source: Subgroup
    target: Subgroup
    element: int
    support: Subgroup


# === Dựng phạm trù ===

def _morphism_table(M: FiniteGroup, objects: Sequence[Subgroup], candidates, admissible) -> Dict[MorphismKey, Tuple[int, ...]]:
    table: Dict[MorphismKey, List[int]] = {}
    for i, P in enumerate(objects):
        for g in candidates:
            if not admissible(P, g):
                continue
            image = conjugate_mask(M, P.mask, g)
            for j, Q in enumerate(objects):
                if image & ~Q.mask == 0:
                    table.setdefault((i, j), []).append(g)
    return {key: tuple(v) for key, v in table.items()}


def build_transporter(L: Locality) -> TransporterCat:
    """Mor(P, Q) = {g in L | P <= S_g, P^g <= Q} trên đối tượng Delta"""
    objects = list(L.delta)
    morphisms = _morphism_table(
        L.ambient, objects, L.members, lambda P, g: P.mask & ~L.s_mask(g) == 0
    )
    T = TransporterCat(
        L.ambient, S=L.S, p=L.p, objects=objects, morphisms=morphisms, locality=L, name=f"T_Delta({L.name})"
    )
    logger.info(f"Đã dựng {T.name}: {len(objects)} đối tượng, {T.morphism_count} cấu xạ")
    return T


def build_group_transporter(G: FiniteGroup, p: int, delta_spec: DeltaSpecLike = "all") -> TransporterCat:
    """Mor(P, Q) = {g in G | P^g <= Q}; đối tượng là Delta của locality dẫn xuất"""
    L = build_group_locality(G, p, delta_spec)
    objects = list(L.delta)
    morphisms = _morphism_table(G, objects, G.elements(), lambda P, g: True)
    T = TransporterCat(G, S=L.S, p=p, objects=objects, morphisms=morphisms, locality=L, name=f"T_S({G.name})")
    logger.info(f"Đã dựng {T.name}: {len(objects)} đối tượng, {T.morphism_count} cấu xạ")
    return T


def full_subcategory(T: TransporterCat, objects: Sequence[Subgroup], *, name: Optional[str] = None) -> TransporterCat:
    indices = [T.index_of(P) for P in objects]
    morphisms = {
        (a, b): T.mor(i, j) for a, i in enumerate(indices) for b, j in enumerate(indices) if T.mor(i, j)
    }
    return TransporterCat(
        T.ambient, S=T.S, p=T.p, objects=[T.objects[i] for i in indices], morphisms=morphisms,
        locality=T.locality, name=name or f"{T.name}|{len(indices)}",
    )


def is_t_essential(T: TransporterCat, i: int) -> bool:
    """N_S(P) Sylow trong Aut_T(P) và Aut_T(P)/P có nhóm con nhúng p-mạnh"""
    M = T.ambient
    P = T.objects[i]
    aut = T.automorphisms(i)
    if normalizer(M, T.S, P).order != p_part(aut.order, T.p):
        return False
    quot, _ = quotient(M, aut, P)
    return strongly_p_embedded(quot, T.p).exists


def t_essential_subcategory(T: TransporterCat) -> TransporterCat:
    """Tiểu phạm trù đầy trên S và các đối tượng T-essential"""
    chosen = [
        P for i, P in enumerate(T.objects) if P == T.S or is_t_essential(T, i)
    ]
    Te = full_subcategory(T, chosen, name=f"{T.name}^e")
    logger.info(f"{Te.name}: đối tượng cấp {[P.order for P in chosen]}")
    return Te


def check_category_laws(T: TransporterCat) -> List[str]:
    """Đơn vị e in Mor(P, P) và Mor(P, Q) * Mor(Q, R) ⊆ Mor(P, R)"""
    M = T.ambient
    problems: List[str] = []
    n = len(T.objects)
    for i in range(n):
        if 0 not in T.mor(i, i):
            problems.append(f"thiếu đơn vị tại đối tượng {i}")
    for i in range(n):
        for j in range(n):
            first = T.mor(i, j)
            if not first:
                continue
            for k in range(n):
                second = T.mor(j, k)
                if not second:
                    continue
                allowed = set(T.mor(i, k))
                composite = M.table[np.ix_(first, second)]
                missing = [int(x) for x in np.unique(composite) if int(x) not in allowed]
                if missing:
                    problems.append(
                        f"hợp thành {i}->{j}->{k} không đóng: {M.label(missing[0])} không thuộc Mor({i}, {k})"
                    )
    return problems


def decompose_morphism(T: TransporterCat, P: Subgroup, Q: Subgroup, g: int) -> List[TransporterFactor]:
    """
    Phân tích g: P -> Q thành chuỗi hạn chế của tự đẳng cấu các đối tượng của T^e.

    Dùng chứng chỉ essential của g (P <= S_g); bao hàm P^g -> Q được thêm cuối khi cần.
    """
    i, j = T.index_of(P), T.index_of(Q)
    T.position(i, j, g)
    if T.locality is None:
        raise InvalidInput(f"{T.name} không gắn locality")
    M = T.ambient
    cert = decompose(T.locality, g)

    chain: List[TransporterFactor] = []
    current = P
    for R, x in cert.factors:
        if x == 0:
            continue
        nxt = current.conjugate(x)
        chain.append(TransporterFactor(current, nxt, x, R))
        current = nxt
    if not chain or current != Q:
        chain.append(TransporterFactor(current, Q, 0, T.S))
    return chain


# === Hàm tử ===

class FunctorPres:
    """
    Hàm tử phản biến F: T -> nhóm abel hữu hạn.

    maps[(i, j)] có dạng (|Mor(i, j)|, rank F(P_i), rank F(P_j)), căn theo T.mor(i, j).
    """

    def __init__(self, category: TransporterCat, values: Sequence[AbPres], maps: Dict[MorphismKey, np.ndarray], *, name: str = "F"):
        self.category = category
        self.values: Tuple[AbPres, ...] = tuple(values)
        self.maps = maps
        self.name = name

    def value_at(self, i: int) -> AbPres:
        return self.values[i]

    def matrix_of(self, i: int, j: int, g: int) -> np.ndarray:
        return self.maps[(i, j)][self.category.position(i, j, g)]

    def __repr__(self) -> str:
        return f"FunctorPres({self.name!r}, values={[str(v) for v in self.values]})"


def _empty_stack(count: int, rows: int, cols: int) -> np.ndarray:
    return np.zeros((count, rows, cols), dtype=np.int64)


def fixed_point_presentations(T: TransporterCat, module: "GModule") -> List[FiniteSubgroupPres]:
    """M^P cho mọi đối tượng P"""
    return [fixed_subgroup(module.orders, [module.matrix(x) for x in P.generators()]) for P in T.objects]


def fixed_point_functor(T: TransporterCat, module: "GModule") -> FunctorPres:
    """F(P) = M^P; g: P -> Q cho M^Q -> M^P, m -> g * m"""
    if module.group.order != T.ambient.order:
        raise ActionInvalid(f"Module trên {module.group.name} không tác động lên {T.ambient.name}")
    fixed = fixed_point_presentations(T, module)
    orders = np.array(module.orders, dtype=np.int64)
    maps: Dict[MorphismKey, np.ndarray] = {}
    for (i, j) in T.pairs():
        elems = T.mor(i, j)
        stack = _empty_stack(len(elems), len(fixed[i].invariant_factors), len(fixed[j].invariant_factors))
        for pos, g in enumerate(elems):
            A = module.matrix(g)
            for c, v in enumerate(fixed[j].generators):
                w = (A @ np.array(v, dtype=np.int64)) % orders
                stack[pos, :, c] = fixed[i].coordinates(w.tolist())
        maps[(i, j)] = stack
    F = FunctorPres(T, [fp.as_abpres() for fp in fixed], maps, name="fixed-points")
    logger.info(f"Hàm tử điểm bất động trên {T.name}: {[str(v) for v in F.values]}")
    return F


def restrict_functor(F: FunctorPres, sub: TransporterCat) -> FunctorPres:
    """Hạn chế F lên tiểu phạm trù đầy sub"""
    T = F.category
    idx = [T.index_of(P) for P in sub.objects]
    maps = {(a, b): F.maps[(idx[a], idx[b])] for (a, b) in sub.pairs()}
    return FunctorPres(sub, [F.values[i] for i in idx], maps, name=F.name)


def _well_defined(A: np.ndarray, target: Sequence[int], source: Sequence[int]) -> bool:
    # Z/source_c -> Z/target_r xác định khi target_r | A[r, c] * source_c
    if A.size == 0:
        return True
    t = np.array(target, dtype=np.int64)[:, None]
    s = np.array(source, dtype=np.int64)[None, :]
    return not ((A * s) % t).any()


def check_functoriality(F: FunctorPres) -> List[str]:
    """Kiểm tra vét cạn: ma trận xác định, đơn vị, và mọi cặp hợp thành được"""
    T = F.category
    M = T.ambient
    problems: List[str] = []
    n = len(T.objects)
    orders = [np.array(v.cyclic_orders, dtype=np.int64) for v in F.values]

    for (i, j) in T.pairs():
        stack = F.maps.get((i, j))
        shape = (len(T.mor(i, j)), F.values[i].rank, F.values[j].rank)
        if stack is None or stack.shape != shape:
            problems.append(f"thiếu hoặc sai kích thước ma trận cho Mor({i}, {j})")
            continue
        for pos, g in enumerate(T.mor(i, j)):
            if not _well_defined(stack[pos], F.values[i].cyclic_orders, F.values[j].cyclic_orders):
                problems.append(f"ma trận của {T.morphism_id(i, j, g)} không xác định trên các cấp cyclic")
    if problems:
        return problems

    for i in range(n):
        if not F.values[i].rank:
            continue
        ident = F.matrix_of(i, i, 0)
        if ((ident - np.eye(F.values[i].rank, dtype=np.int64)) % orders[i][:, None]).any():
            problems.append(f"đơn vị tại đối tượng {i} không cho ma trận đơn vị")

    for i in range(n):
        if not F.values[i].rank:
            continue
        mod = orders[i][None, None, :, None]
        for j in range(n):
            first = T.mor(i, j)
            if not first:
                continue
            for k in range(n):
                second = T.mor(j, k)
                if not second:
                    continue
                composite = M.table[np.ix_(first, second)]
                lookup = T._positions.get((i, k), {})
                try:
                    idx = np.vectorize(lookup.__getitem__, otypes=[np.int64])(composite)
                except KeyError:
                    problems.append(f"hợp thành {i}->{j}->{k} ra ngoài Mor({i}, {k})")
                    continue
                expected = F.maps[(i, k)][idx]
                got = np.einsum("arc,bcs->abrs", F.maps[(i, j)], F.maps[(j, k)])
                bad = np.argwhere(((expected - got) % mod).any(axis=(2, 3)))
                if bad.size:
                    a, b = (int(v) for v in bad[0])
                    problems.append(
                        f"matrix({M.label(first[a])} * {M.label(second[b])}) != tích ma trận "
                        f"trên {i}->{j}->{k}"
                    )
    return problems


def functor_from_spec(T: TransporterCat, spec: FunctorSpec) -> FunctorPres:
    """
    Hàm tử do người dùng cung cấp: đối tượng theo chỉ số trong T.objects, cấu xạ "i:j:<nhãn>".

    Cấu xạ đơn vị có thể bỏ qua; mọi cấu xạ khác phải có ma trận.
    """
    M = T.ambient
    values: List[AbPres] = []
    for i in range(len(T.objects)):
        orders = spec.values.get(str(i))
        if orders is None:
            raise InvalidSpec(f"Thiếu giá trị cho đối tượng {i}")
        if any(m < 2 or not is_p_power(m, T.p) for m in orders):
            raise InvalidSpec(f"Cấp cyclic {orders} của đối tượng {i} không là lũy thừa của {T.p}")
        values.append(AbPres(tuple(orders)))

    given: Dict[Tuple[int, int, int], np.ndarray] = {}
    for key, matrix in spec.maps.items():
        parts = key.split(":", 2)
        if len(parts) != 3:
            raise InvalidSpec(f"Mã cấu xạ không hợp lệ: {key!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise InvalidSpec(f"Mã cấu xạ không hợp lệ: {key!r}") from None
        if not (0 <= i < len(values) and 0 <= j < len(values)):
            raise InvalidSpec(f"Đối tượng ngoài phạm vi trong {key!r}")
        g = M.parse_element(parts[2])
        T.position(i, j, g)
        try:
            A = np.array(matrix, dtype=np.int64).reshape(values[i].rank, values[j].rank)
        except ValueError:
            raise InvalidSpec(f"Ma trận của {key!r} phải có kích thước {values[i].rank}x{values[j].rank}") from None
        given[(i, j, g)] = A

    maps: Dict[MorphismKey, np.ndarray] = {}
    for (i, j) in T.pairs():
        elems = T.mor(i, j)
        stack = _empty_stack(len(elems), values[i].rank, values[j].rank)
        for pos, g in enumerate(elems):
            if (i, j, g) in given:
                stack[pos] = given[(i, j, g)]
            elif i == j and g == 0:
                stack[pos] = np.eye(values[i].rank, dtype=np.int64)
            else:
                raise FunctorInconsistent(f"Thiếu ma trận cho cấu xạ {T.morphism_id(i, j, g)}")
        maps[(i, j)] = stack

    F = FunctorPres(T, values, maps, name="user")
    problems = check_functoriality(F)
    if problems:
        logger.error(f"Hàm tử người dùng vi phạm tính hàm tử: {problems[0]}")
        raise FunctorInconsistent(f"{len(problems)} vi phạm; đầu tiên: {problems[0]}")
    return F


# === Giới hạn ngược ===

def limit_presentation(T: TransporterCat, F: FunctorPres) -> FiniteSubgroupPres:
    """
    Nhóm con của ∏ F(P) gồm các họ (x_P) với matrix(g) x_Q = x_P cho mọi cấu xạ g: P -> Q.
    """
    if F.category is not T:
        F = restrict_functor(F, T)
    offsets = []
    orders: List[int] = []
    for value in F.values:
        offsets.append(len(orders))
        orders.extend(value.cyclic_orders)

    rows = []
    for (i, j) in T.pairs():
        r_i = F.values[i].rank
        if not r_i:
            continue
        stack = F.maps[(i, j)]
        distinct = np.unique(stack, axis=0) if stack.shape[2] else stack[:1]
        for A in distinct:
            for r in range(r_i):
                h = [0] * len(orders)
                for c in range(F.values[j].rank):
                    h[offsets[j] + c] += int(A[r, c])
                h[offsets[i] + r] -= 1
                rows.append((h, F.values[i].cyclic_orders[r]))
    try:
        return subgroup_of_solutions(orders, rows)
    except InvalidInput as e:
        raise FunctorInconsistent(f"Ma trận của {F.name} không xác định: {e}") from e


def inverse_limit(T: TransporterCat, F: FunctorPres) -> AbPres:
    result = limit_presentation(T, F).as_abpres()
    logger.info(f"lim_{T.name} {F.name} = {result}")
    return result
