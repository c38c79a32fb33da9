"""
Nhóm abel hữu hạn và đại số tuyến tính nguyên chính xác.

- AbPres: tổng trực tiếp các nhóm cyclic Z/m_i.
- SmithNormalForm: U * A * V = D bằng phép khử Euclid mở rộng trên số nguyên Python
  (mảng numpy dtype=object, không tràn số); theo dõi thêm U^-1.
- subgroup_of_solutions: nhóm con của ⊕ Z/m_j cắt bởi các đồng dư nguyên, dùng chung
  cho giới hạn ngược và điểm bất động.
"""

import logging
import sys
import pathlib
from dataclasses import dataclass
from math import prod
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from src.errors import InternalInvariantViolation, InvalidInput

logger = logging.getLogger(__name__)

Congruence = Tuple[Sequence[int], int]


@dataclass(frozen=True)
class AbPres:
    """⊕ Z/m_i theo tọa độ cố định; danh sách rỗng là nhóm tầm thường"""

    cyclic_orders: Tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return prod(self.cyclic_orders)

    @property
    def rank(self) -> int:
        return len(self.cyclic_orders)

    def invariant_factors(self) -> List[int]:
        """Dạng chuẩn để so sánh: các ước sơ cấp (lũy thừa nguyên tố) tăng dần"""
        divisors: List[int] = []
        for m in self.cyclic_orders:
            divisors.extend(q ** e for q, e in factorint(m).items())
        return sorted(divisors)

    def is_isomorphic(self, other: "AbPres") -> bool:
        return self.invariant_factors() == other.invariant_factors()

    def __str__(self) -> str:
        factors = self.invariant_factors()
        return " x ".join(f"C{m}" for m in factors) if factors else "trivial"


def _identity(n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    return out


def _as_object_matrix(A, rows: Optional[int] = None, cols: Optional[int] = None) -> np.ndarray:
    arr = np.array(A, dtype=object)
    if arr.size == 0:
        return np.zeros((rows or 0, cols or 0), dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return np.vectorize(int, otypes=[object])(arr)


class SmithNormalForm:
    """
    Dạng chuẩn Smith của ma trận nguyên A (m x n).

    Sau khi dựng: left @ A @ right == D, D chéo với d_i | d_{i+1}, d_i >= 0;
    left_inv là nghịch đảo của left.
    """

    def __init__(self, A):
        self.A = _as_object_matrix(A)
        m, n = self.A.shape
        self.D = self.A.copy()
        self.left = _identity(m)
        self.left_inv = _identity(m)
        self.right = _identity(n)
        self._run()

    @property
    def num_row(self) -> int:
        return self.D.shape[0]

    @property
    def num_column(self) -> int:
        return self.D.shape[1]

    def diagonal(self) -> List[int]:
        return [int(self.D[i, i]) for i in range(min(self.D.shape))]

    # === Phép biến đổi sơ cấp ===

    def _swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        self.D[[i, j]] = self.D[[j, i]]
        self.left[[i, j]] = self.left[[j, i]]
        self.left_inv[:, [i, j]] = self.left_inv[:, [j, i]]

    def _add_row(self, i: int, j: int, k) -> None:
        """hàng i += k * hàng j"""
        self.D[i] += self.D[j] * k
        self.left[i] += self.left[j] * k
        self.left_inv[:, j] -= self.left_inv[:, i] * k

    def _negate_row(self, i: int) -> None:
        self.D[i] *= -1
        self.left[i] *= -1
        self.left_inv[:, i] *= -1

    def _swap_columns(self, i: int, j: int) -> None:
        if i == j:
            return
        self.D[:, [i, j]] = self.D[:, [j, i]]
        self.right[:, [i, j]] = self.right[:, [j, i]]

    def _add_column(self, i: int, j: int, k) -> None:
        """cột i += k * cột j"""
        self.D[:, i] += self.D[:, j] * k
        self.right[:, i] += self.right[:, j] * k

    # === Khử ===

    def _pivot(self, s: int) -> Optional[Tuple[int, int]]:
        best, where = None, None
        for i in range(s, self.num_row):
            for j in range(s, self.num_column):
                v = self.D[i, j]
                if v != 0 and (best is None or abs(v) < best):
                    best, where = abs(v), (i, j)
        return where

    def _non_divisible(self, s: int) -> Optional[int]:
        d = self.D[s, s]
        for i in range(s + 1, self.num_row):
            for j in range(s + 1, self.num_column):
                if self.D[i, j] % d != 0:
                    return i
        return None

    def _run(self) -> None:
        for s in range(min(self.D.shape)):
            while True:
                where = self._pivot(s)
                if where is None:
                    return
                self._swap_rows(s, where[0])
                self._swap_columns(s, where[1])
                d = self.D[s, s]

                for i in range(s + 1, self.num_row):
                    if self.D[i, s] != 0:
                        self._add_row(i, s, -(self.D[i, s] // d))
                for j in range(s + 1, self.num_column):
                    if self.D[s, j] != 0:
                        self._add_column(j, s, -(self.D[s, j] // d))

                if any(self.D[i, s] != 0 for i in range(s + 1, self.num_row)) or any(
                    self.D[s, j] != 0 for j in range(s + 1, self.num_column)
                ):
                    continue
                row = self._non_divisible(s)
                if row is not None:
                    self._add_row(s, row, 1)
                    continue
                if self.D[s, s] < 0:
                    self._negate_row(s)
                break


def smith_normal_form(A) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(U, D, V) với U unimodular, V unimodular và U @ A @ V == D"""
    snf = SmithNormalForm(A)
    return snf.left, snf.D, snf.right


@dataclass(frozen=True)
class FiniteSubgroupPres:
    """
    Nhóm con K của ⊕ Z/orders, trình bày dưới dạng ⊕ Z/invariant_factors.

    generators[i] (tọa độ xung quanh) có cấp invariant_factors[i]; coordinates(x) là ánh xạ ngược.
    """

    orders: Tuple[int, ...]
    invariant_factors: Tuple[int, ...]
    generators: Tuple[Tuple[int, ...], ...]
    # x in K  <=>  (U0 x)_i chia hết cho d0_i; tọa độ là U2 (U0 x / d0) lấy theo kept
    _U0: Tuple[Tuple[int, ...], ...] = ()
    _d0: Tuple[int, ...] = ()
    _U2: Tuple[Tuple[int, ...], ...] = ()
    _kept: Tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return prod(self.invariant_factors)

    def as_abpres(self) -> AbPres:
        return AbPres(self.invariant_factors)

    def _scaled(self, x: Sequence[int]) -> Optional[List[int]]:
        y = [sum(u * int(v) for u, v in zip(row, x)) for row in self._U0]
        if any(yi % di for yi, di in zip(y, self._d0)):
            return None
        return [yi // di for yi, di in zip(y, self._d0)]

    def contains(self, x: Sequence[int]) -> bool:
        return self._scaled(x) is not None

    def coordinates(self, x: Sequence[int]) -> Tuple[int, ...]:
        t = self._scaled(x)
        if t is None:
            raise InvalidInput(f"{list(x)} không thuộc nhóm con")
        coords = []
        for i, d in zip(self._kept, self.invariant_factors):
            coords.append(sum(u * ti for u, ti in zip(self._U2[i], t)) % d)
        return tuple(coords)

    def element(self, coords: Sequence[int]) -> Tuple[int, ...]:
        """Phần tử (tọa độ xung quanh) có tọa độ coords"""
        out = [0] * len(self.orders)
        for c, gen in zip(coords, self.generators):
            for j, v in enumerate(gen):
                out[j] += c * v
        return tuple(v % m for v, m in zip(out, self.orders))


def _reduce_rows(B: np.ndarray, orders: Sequence[int]) -> np.ndarray:
    out = B.copy()
    for j, m in enumerate(orders):
        out[j] = np.array([v % m for v in out[j]], dtype=object)
    return out


def _lattice_basis(gens: np.ndarray, orders: Sequence[int]) -> SmithNormalForm:
    k = len(orders)
    full = np.concatenate([gens, np.diag(np.array(orders, dtype=object))], axis=1)
    snf = SmithNormalForm(full)
    if any(d == 0 for d in snf.diagonal()[:k]):
        raise InternalInvariantViolation("Dàn nghiệm suy biến")
    return snf


def _normalize_congruences(
    orders: Sequence[int], congruences: Iterable[Congruence]
) -> List[Tuple[Tuple[int, ...], int]]:
    seen = {}
    for h, n in congruences:
        n = int(n)
        if n <= 0 or len(h) != len(orders):
            raise InvalidInput(f"Đồng dư không hợp lệ: modulus {n}, độ dài {len(h)}")
        row = tuple(int(v) % n for v in h)
        if n == 1 or not any(row):
            continue
        if any((v * m) % n for v, m in zip(row, orders)):
            raise InvalidInput(f"Đồng dư {list(row)} mod {n} không xác định trên ⊕ Z/{list(orders)}")
        seen.setdefault((row, n), None)
    return list(seen)


def subgroup_of_solutions(orders: Sequence[int], congruences: Iterable[Congruence]) -> FiniteSubgroupPres:
    """
    {x in ⊕ Z/orders | sum_j h_j x_j ≡ 0 mod n cho mọi (h, n)}.

    Giữ một cơ sở dàn B của tiền ảnh trong Z^k (luôn chứa diag(orders)); mỗi đồng dư thu
    hẹp dàn qua hạt nhân của [h B | n].
    """
    orders = tuple(int(m) for m in orders)
    k = len(orders)
    if k == 0:
        return FiniteSubgroupPres((), (), ())
    rows = _normalize_congruences(orders, congruences)

    B = _identity(k)
    applied = 0
    for h, n in rows:
        a = [sum(h[j] * B[j, c] for j in range(k)) % n for c in range(k)]
        if not any(a):
            continue
        applied += 1
        kernel = SmithNormalForm([a + [n]]).right[:k, 1:]
        snf = _lattice_basis(_reduce_rows(B.dot(kernel), orders), orders)
        B = snf.left_inv.dot(np.diag(np.array(snf.diagonal()[:k], dtype=object)))

    base = _lattice_basis(_reduce_rows(B, orders), orders)
    U0 = base.left
    d0 = base.diagonal()[:k]
    C = np.zeros((k, k), dtype=object)
    for i in range(k):
        for j in range(k):
            value = U0[i, j] * orders[j]
            if value % d0[i]:
                raise InternalInvariantViolation("diag(orders) không nằm trong dàn nghiệm")
            C[i, j] = value // d0[i]

    quot = SmithNormalForm(C)
    factors = quot.diagonal()
    B_final = base.left_inv.dot(np.diag(np.array(d0, dtype=object)))
    gens_matrix = B_final.dot(quot.left_inv)

    kept = tuple(i for i, d in enumerate(factors) if d > 1)
    generators = tuple(
        tuple(int(gens_matrix[j, i]) % orders[j] for j in range(k)) for i in kept
    )
    result = FiniteSubgroupPres(
        orders=orders,
        invariant_factors=tuple(factors[i] for i in kept),
        generators=generators,
        _U0=tuple(tuple(int(v) for v in row) for row in U0),
        _d0=tuple(d0),
        _U2=tuple(tuple(int(v) for v in row) for row in quot.left),
        _kept=kept,
    )
    logger.debug(
        f"Giải {len(rows)} đồng dư ({applied} có hiệu lực) trên ⊕ Z/{list(orders)}: "
        f"{list(result.invariant_factors)}"
    )
    return result


def fixed_subgroup(orders: Sequence[int], matrices: Iterable[np.ndarray]) -> FiniteSubgroupPres:
    """{x | A x = x} cho mọi ma trận A (tác động trên ⊕ Z/orders)"""
    orders = tuple(int(m) for m in orders)
    rows: List[Congruence] = []
    for A in matrices:
        delta = np.array(A, dtype=np.int64) - np.eye(len(orders), dtype=np.int64)
        rows.extend((delta[r].tolist(), orders[r]) for r in range(len(orders)))
    return subgroup_of_solutions(orders, rows)
