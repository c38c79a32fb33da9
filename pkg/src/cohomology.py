"""
Đối đồng điều nhóm qua phân giải bar (cochain không thuần nhất) cho bậc nhỏ.

Module sơ cấp (mọi cấp cyclic bằng p) đi đường khử Gauss trên F_p; module ⊕ Z/m_j khác
đi đường chính xác: cocycle là nghiệm của hệ đồng dư, thương theo coboundary qua dạng
Smith. Lớp đối đồng điều được biểu diễn bằng cocycle đại diện kèm phép chiếu về tọa độ lớp.
"""

import itertools
import logging
import threading
import sys
import pathlib
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import isprime

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from config.settings import settings
from src.abelian import AbPres, FiniteSubgroupPres, SmithNormalForm, subgroup_of_solutions
from src.errors import (
    ActionInvalid, BoundExceeded, InternalInvariantViolation, InvalidSpec, ModuleNotPGroup, NotAMorphism,
)
from src.finite_group import FiniteGroup, Subgroup, conjugate_mask, is_p_power
from src.models import CartanEilenbergReport, ModuleSpec
from src.transporter import (
    FunctorPres, TransporterCat, build_group_transporter, check_functoriality, fixed_point_functor,
    inverse_limit, restrict_functor, t_essential_subcategory,
)

logger = logging.getLogger(__name__)


class GModule:
    """
    Module hữu hạn ⊕ Z/orders với tác động trái của G: action[g] là ma trận,
    action[a * b] = action[a] @ action[b].
    """

    def __init__(self, group: FiniteGroup, orders: Sequence[int], action, *, name: str = "M", validate: bool = True):
        self.group = group
        self.orders: Tuple[int, ...] = tuple(int(m) for m in orders)
        self.action = np.array(action, dtype=np.int64).reshape(group.order, self.rank, self.rank)
        self.action %= np.array(self.orders, dtype=np.int64)[None, :, None] if self.rank else 1
        self.action.setflags(write=False)
        self.name = name
        self._cache: Dict[Any, Any] = {}
        self._lock = threading.Lock()
        if validate:
            problems = check_action(self)
            if problems:
                raise ActionInvalid(f"{name}: {problems[0]}")

    @property
    def rank(self) -> int:
        return len(self.orders)

    def matrix(self, g: int) -> np.ndarray:
        return self.action[g]

    def act(self, g: int, v: Sequence[int]) -> Tuple[int, ...]:
        w = (self.action[g] @ np.array(v, dtype=np.int64)) % np.array(self.orders, dtype=np.int64)
        return tuple(int(x) for x in w)

    def elementary_prime(self) -> Optional[int]:
        """p khi mọi cấp cyclic bằng cùng một số nguyên tố p, ngược lại None"""
        if self.orders and len(set(self.orders)) == 1 and isprime(self.orders[0]):
            return self.orders[0]
        return None

    def is_p_module(self, p: int) -> bool:
        return all(is_p_power(m, p) for m in self.orders)

    def memo(self, key: Any, factory):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = factory()
        with self._lock:
            return self._cache.setdefault(key, value)

    def __repr__(self) -> str:
        return f"GModule({self.name!r}, orders={list(self.orders)}, group={self.group.name})"


def check_action(module: GModule) -> List[str]:
    """Ma trận xác định trên các cấp, e tác động tầm thường, và action là đồng cấu"""
    problems: List[str] = []
    r = module.rank
    if not r:
        return problems
    G = module.group
    orders = np.array(module.orders, dtype=np.int64)
    A = module.action
    if ((A * orders[None, None, :]) % orders[None, :, None]).any():
        problems.append("có ma trận không xác định trên ⊕ Z/orders")
    if ((A[0] - np.eye(r, dtype=np.int64)) % orders[:, None]).any():
        problems.append("đơn vị không tác động tầm thường")
    products = np.einsum("aij,bjk->abik", A, A) % orders[None, None, :, None]
    expected = A[G.table]
    bad = np.argwhere((products != expected).any(axis=(2, 3)))
    if bad.size:
        a, b = (int(v) for v in bad[0])
        problems.append(f"action({G.label(a)} * {G.label(b)}) != action({G.label(a)}) @ action({G.label(b)})")
    return problems


def trivial_module(G: FiniteGroup, orders: Sequence[int] = (2,)) -> GModule:
    r = len(orders)
    action = np.broadcast_to(np.eye(r, dtype=np.int64), (G.order, r, r))
    return GModule(G, orders, action, name=f"trivial{list(orders)}")


def permutation_module(G: FiniteGroup, p: int) -> GModule:
    """F_p-module hoán vị tự nhiên: action[g][j, j^g] = 1"""
    if G.points is None:
        raise InvalidSpec(f"{G.name} không phải nhóm hoán vị")
    n = G.degree
    action = np.zeros((G.order, n, n), dtype=np.int64)
    for g in G.elements():
        action[g, np.arange(n), G.points[g]] = 1
    return GModule(G, (p,) * n, action, name=f"F{p}^{n}")


def module_from_spec(G: FiniteGroup, spec: ModuleSpec) -> GModule:
    """Tác động cho trên các phần tử sinh rồi mở rộng nhân tính bằng BFS"""
    r = len(spec.orders)
    orders = np.array(spec.orders, dtype=np.int64)
    if not spec.action:
        return trivial_module(G, spec.orders)

    gens: List[Tuple[int, np.ndarray]] = []
    for label, matrix in spec.action.items():
        try:
            A = np.array(matrix, dtype=np.int64).reshape(r, r)
        except ValueError:
            raise ActionInvalid(f"Ma trận của {label} phải có kích thước {r}x{r}") from None
        gens.append((G.parse_element(label), A % orders[:, None]))

    action: Dict[int, np.ndarray] = {0: np.eye(r, dtype=np.int64)}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for s, A in gens:
            y = G.mul(x, s)
            if y not in action:
                action[y] = (action[x] @ A) % orders[:, None]
                queue.append(y)
    if len(action) != G.order:
        raise ActionInvalid(f"Các phần tử sinh của module chỉ sinh {len(action)}/{G.order} phần tử của {G.name}")
    return GModule(G, spec.orders, np.stack([action[g] for g in G.elements()]), name="module")


# === Phức bar ===

@dataclass(frozen=True)
class CochainSpace:
    """C^n(H; M): tọa độ đánh số theo (bộ n phần tử của H) x (thành phần của M)"""

    size: int
    degree: int
    rank: int

    @property
    def tuples(self) -> int:
        return self.size ** self.degree

    @property
    def dimension(self) -> int:
        return self.tuples * self.rank

    def tuple_index(self, t: Sequence[int]) -> int:
        idx = 0
        for a in t:
            idx = idx * self.size + a
        return idx


def _as_subgroup(G: Union[FiniteGroup, Subgroup], module: GModule) -> Subgroup:
    H = G.whole if isinstance(G, FiniteGroup) else G
    if H.parent.order != module.group.order:
        raise InvalidSpec(f"Module {module.name} không xác định trên nhóm cấp {H.parent.order}")
    return H


def _check_bounds(H: Subgroup, module: GModule, n: int) -> None:
    if n < 0 or n > settings.max_cohomology_degree:
        raise BoundExceeded(f"Bậc {n} ngoài giới hạn 0..{settings.max_cohomology_degree}")
    size = H.order ** (n + 1) * max(module.rank, 1)
    if size > settings.max_cochain_coordinates:
        raise BoundExceeded(f"|H|^(n+1) * rank = {size} > {settings.max_cochain_coordinates}")


def _local_tables(H: Subgroup, module: GModule) -> Tuple[List[List[int]], np.ndarray]:
    G = module.group
    members = H.members
    local = {x: i for i, x in enumerate(members)}
    mult = [[local[G.mul(a, b)] for b in members] for a in members]
    return mult, module.action[list(members)]


def coboundary(G: Union[FiniteGroup, Subgroup], module: GModule, n: int) -> np.ndarray:
    """
    d^n: C^n -> C^(n+1) dạng ma trận nguyên.

    (d f)(g_1..g_{n+1}) = g_1 f(g_2..) + sum_i (-1)^i f(.., g_i g_{i+1}, ..) + (-1)^(n+1) f(g_1..g_n)
    """
    H = _as_subgroup(G, module)
    _check_bounds(H, module, n)
    mult, A = _local_tables(H, module)
    h, r = H.order, module.rank
    src = CochainSpace(h, n, r)
    dst = CochainSpace(h, n + 1, r)
    eye = np.eye(r, dtype=np.int64)

    D = np.zeros((dst.dimension, src.dimension), dtype=np.int64)
    for row, t in enumerate(itertools.product(range(h), repeat=n + 1)):
        R = slice(row * r, (row + 1) * r)
        c = src.tuple_index(t[1:])
        D[R, c * r:(c + 1) * r] += A[t[0]]
        for i in range(1, n + 1):
            merged = t[:i - 1] + (mult[t[i - 1]][t[i]],) + t[i + 1:]
            c = src.tuple_index(merged)
            D[R, c * r:(c + 1) * r] += eye if i % 2 == 0 else -eye
        c = src.tuple_index(t[:n])
        D[R, c * r:(c + 1) * r] += eye if (n + 1) % 2 == 0 else -eye
    return D


# === Đại số tuyến tính trên F_p ===

def rref_mod_p(A: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    R = np.array(A, dtype=np.int64) % p
    rows, cols = R.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = (R[r] * pow(int(R[r, c]), -1, p)) % p
        col = R[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            R[hit] = (R[hit] - np.outer(col[hit], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def nullspace_mod_p(A: np.ndarray, p: int) -> np.ndarray:
    """Cơ sở hạt nhân, các vector là cột"""
    R, pivots = rref_mod_p(A, p)
    cols = A.shape[1]
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    N = np.zeros((cols, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        N[f, k] = 1
    if pivots and free:
        N[pivots, :] = (-R[:len(pivots)][:, free]) % p
    return N


def inverse_mod_p(A: np.ndarray, p: int) -> np.ndarray:
    n = A.shape[0]
    R, pivots = rref_mod_p(np.hstack([A % p, np.eye(n, dtype=np.int64)]), p)
    if pivots[:n] != list(range(n)):
        raise InternalInvariantViolation("Ma trận không khả nghịch modulo p")
    return R[:, n:]


@dataclass(frozen=True)
class CohomologyData:
    """
    H^n(H; M) ≅ ⊕ Z/invariant_factors.

    representatives[:, i] là cocycle đại diện cho phần tử sinh thứ i; classes_of đưa
    cocycle (cột) về tọa độ lớp.
    """

    degree: int
    cochain_orders: Tuple[int, ...]
    invariant_factors: Tuple[int, ...]
    representatives: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.invariant_factors)

    def as_abpres(self) -> AbPres:
        return AbPres(self.invariant_factors)

    def classes_of(self, cocycles: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ModularCohomology(CohomologyData):
    """Module sơ cấp: khử Gauss trên F_p"""

    prime: int = 2
    rows: Tuple[int, ...] = ()
    projection: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    def classes_of(self, cocycles: np.ndarray) -> np.ndarray:
        return (self.projection @ (cocycles[list(self.rows)] % self.prime)) % self.prime


@dataclass(frozen=True)
class IntegralCohomology(CohomologyData):
    """
    Module bất kỳ: Z^n là nhóm con của C^n cắt bởi d^n, H^n = Z^n / B^n qua dạng Smith.

    Lớp của cocycle z có tọa độ (left @ coords_Z(z)) mod d_i với i thuộc kept.
    """

    cocycles: Optional[FiniteSubgroupPres] = None
    left: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=object))
    kept: Tuple[int, ...] = ()

    def classes_of(self, cocycles: np.ndarray) -> np.ndarray:
        orders = np.array(self.cochain_orders, dtype=np.int64)[:, None]
        reduced = np.asarray(cocycles, dtype=np.int64) % orders
        out = np.zeros((self.dimension, reduced.shape[1]), dtype=np.int64)
        for c in range(reduced.shape[1]):
            y = self.cocycles.coordinates(reduced[:, c].tolist())
            for k, (i, d) in enumerate(zip(self.kept, self.invariant_factors)):
                out[k, c] = sum(int(u) * v for u, v in zip(self.left[i], y)) % d
        return out


def _cochain_orders(H: Subgroup, module: GModule, n: int) -> Tuple[int, ...]:
    return module.orders * (H.order ** n)


def _modular_cohomology(H: Subgroup, module: GModule, n: int, p: int) -> ModularCohomology:
    cocycles = nullspace_mod_p(coboundary(H, module, n) % p, p)
    size = cocycles.shape[0]
    if n == 0:
        boundaries = np.zeros((size, 0), dtype=np.int64)
    else:
        R, pivots = rref_mod_p(coboundary(H, module, n - 1).T, p)
        boundaries = R[:len(pivots)].T.copy()
    b = boundaries.shape[1]

    _, pivots = rref_mod_p(np.hstack([boundaries, cocycles]), p)
    if pivots[:b] != list(range(b)):
        raise InternalInvariantViolation("Ảnh d^(n-1) không nằm trong cơ sở đầu")
    reps = cocycles[:, [c - b for c in pivots[b:]]]

    basis = np.hstack([boundaries, reps])
    _, rows = rref_mod_p(basis.T, p)
    inv = inverse_mod_p(basis[rows], p)
    return ModularCohomology(
        degree=n,
        cochain_orders=_cochain_orders(H, module, n),
        invariant_factors=(p,) * reps.shape[1],
        representatives=reps,
        prime=p,
        rows=tuple(rows),
        projection=inv[b:, :],
    )


def integral_cohomology(G: Union[FiniteGroup, Subgroup], module: GModule, n: int) -> IntegralCohomology:
    """H^n với hệ số ⊕ Z/m_j bất kỳ (không qua F_p)"""
    H = _as_subgroup(G, module)
    orders = _cochain_orders(H, module, n)
    targets = _cochain_orders(H, module, n + 1)
    D = coboundary(H, module, n)
    Z = subgroup_of_solutions(orders, ((D[row].tolist(), targets[row]) for row in range(D.shape[0])))

    zf = Z.invariant_factors
    t = len(zf)
    relations: List[List[int]] = []
    if n > 0 and t:
        prev = coboundary(H, module, n - 1) % np.array(orders, dtype=np.int64)[:, None]
        for c in range(prev.shape[1]):
            if prev[:, c].any():
                relations.append(list(Z.coordinates(prev[:, c].tolist())))
    relations.extend([zf[i] if j == i else 0 for j in range(t)] for i in range(t))

    if not t:
        return IntegralCohomology(n, orders, (), np.zeros((len(orders), 0), dtype=np.int64), Z)

    snf = SmithNormalForm(np.array(relations, dtype=object).T)
    diagonal = snf.diagonal()
    kept = tuple(i for i, d in enumerate(diagonal) if d > 1)
    reps = np.zeros((len(orders), len(kept)), dtype=np.int64)
    for k, i in enumerate(kept):
        y = [int(snf.left_inv[j, i]) % zf[j] for j in range(t)]
        reps[:, k] = Z.element(y)
    return IntegralCohomology(
        degree=n,
        cochain_orders=orders,
        invariant_factors=tuple(diagonal[i] for i in kept),
        representatives=reps,
        cocycles=Z,
        left=snf.left,
        kept=kept,
    )


def cohomology_data(G: Union[FiniteGroup, Subgroup], module: GModule, n: int) -> CohomologyData:
    """Chọn F_p cho module sơ cấp, dạng Smith cho mọi module khác; nhớ theo (H, n)"""
    H = _as_subgroup(G, module)
    _check_bounds(H, module, n)

    def compute() -> CohomologyData:
        p = module.elementary_prime()
        data = _modular_cohomology(H, module, n, p) if p else integral_cohomology(H, module, n)
        logger.debug(f"H^{n}(|H|={H.order}; {module.name}) = {data.as_abpres()}")
        return data

    return module.memo(("cohomology", H.mask, n), compute)


def cohomology(G: Union[FiniteGroup, Subgroup], module: GModule, n: int) -> AbPres:
    """H^n(G; M) = ker d^n / im d^(n-1); bậc 0 là M^G"""
    return cohomology_data(G, module, n).as_abpres()


def _tuple_images(P: Subgroup, Q: Subgroup, g: int, n: int) -> np.ndarray:
    """Chỉ số bộ của Q ứng với (p_1^g, ..., p_n^g) cho mọi bộ của P"""
    G = P.parent
    local_Q = {x: i for i, x in enumerate(Q.members)}
    mapped = np.array([local_Q[G.conj(x, g)] for x in P.members], dtype=np.int64)
    idx = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        idx = (idx[:, None] * Q.order + mapped[None, :]).reshape(-1)
    return idx


def pull_back(P: Subgroup, Q: Subgroup, g: int, module: GModule, n: int, cochains: np.ndarray) -> np.ndarray:
    """(phi^* f)(p_1..p_n) = g * f(p_1^g, ..., p_n^g) trên các cột của cochains"""
    r = module.rank
    k = cochains.shape[1]
    idx = _tuple_images(P, Q, g, n)
    values = cochains.reshape(Q.order ** n, r, k)[idx]
    return np.einsum("ij,tjk->tik", module.matrix(g), values).reshape(len(idx) * r, k)


def induced_map(P: Subgroup, Q: Subgroup, g: int, module: GModule, n: int) -> np.ndarray:
    """Ma trận H^n(Q; M) -> H^n(P; M) của cấu xạ transporter g: P -> Q"""
    G = module.group
    if conjugate_mask(G, P.mask, g) & ~Q.mask:
        raise NotAMorphism(f"{G.label(g)} không liên hợp P vào Q")
    source = cohomology_data(Q, module, n)
    target = cohomology_data(P, module, n)
    if not source.dimension or not target.dimension:
        return np.zeros((target.dimension, source.dimension), dtype=np.int64)
    return target.classes_of(pull_back(P, Q, g, module, n, source.representatives))


def cohomology_functor(T: TransporterCat, module: GModule, n: int) -> FunctorPres:
    """P -> H^n(P; M) với ánh xạ cảm sinh; bậc 0 trùng hàm tử điểm bất động"""
    if n == 0:
        F = fixed_point_functor(T, module)
        F.name = "h0"
        return F

    for P in T.objects:
        _check_bounds(P, module, n)
    data = [cohomology_data(P, module, n) for P in T.objects]
    values = [d.as_abpres() for d in data]
    maps: Dict[Tuple[int, int], np.ndarray] = {}
    for (i, j) in T.pairs():
        P, Q = T.objects[i], T.objects[j]
        maps[(i, j)] = np.stack([induced_map(P, Q, g, module, n) for g in T.mor(i, j)])

    F = FunctorPres(T, values, maps, name=f"h{n}")
    problems = check_functoriality(F)
    if problems:
        raise InternalInvariantViolation(f"H^{n}(-; {module.name}) không hàm tử: {problems[0]}")
    logger.info(f"Hàm tử H^{n}(-; {module.name}) trên {T.name}: {[str(v) for v in values]}")
    return F


def check_cartan_eilenberg(G: FiniteGroup, p: int, module: GModule, n: int) -> CartanEilenbergReport:
    """So sánh H^n(G; M), lim trên T_S(G) (mọi nhóm con của S) và lim trên T_S^e(G)"""
    if not module.is_p_module(p):
        raise ModuleNotPGroup(f"{module.name} với cấp {list(module.orders)} không phải {p}-nhóm")
    A = cohomology(G, module, n)
    T = build_group_transporter(G, p, "all")
    F = cohomology_functor(T, module, n)
    B = inverse_limit(T, F)
    Te = t_essential_subcategory(T)
    C = inverse_limit(Te, restrict_functor(F, Te))
    equal = A.is_isomorphic(B) and B.is_isomorphic(C)
    report = CartanEilenbergReport(
        degree=n, H=A.invariant_factors(), lim_T=B.invariant_factors(), lim_Te=C.invariant_factors(), equal=equal
    )
    log = logger.info if equal else logger.error
    log(f"Cartan-Eilenberg {G.name}, p={p}, n={n}: H={report.H}, lim_T={report.lim_T}, lim_Te={report.lim_Te}")
    return report
