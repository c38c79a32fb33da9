"""
Nhóm con nhúng p-mạnh: phương pháp đồ thị (networkx) và phép quét theo định nghĩa
dùng làm oracle; cùng các phần tử sinh giao Sylow và tìm từ ngắn nhất trên đồ thị Cayley.
"""

import logging
import sys
import pathlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import networkx as nx

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from src.errors import InternalInvariantViolation, NotInSpan
from src.finite_group import (
    FiniteGroup, Subgroup, all_subgroups, conjugate_mask, generated_subgroup, is_p_power,
)
from src.locality import Word

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpeResult:
    exists: bool
    witness: Optional[Subgroup] = None


def satisfies_definition(G: FiniteGroup, H: Subgroup, p: int) -> bool:
    """H < G, p | |H| và p không chia |H ∩ H^g| với mọi g ngoài H"""
    if H.order == G.order or H.order % p:
        return False
    for g in G.elements():
        if g in H:
            continue
        if (H.mask & conjugate_mask(G, H.mask, g)).bit_count() % p == 0:
            return False
    return True


def _order_p_subgroups(G: FiniteGroup, p: int) -> List[int]:
    found: Dict[int, None] = {}
    for x in G.elements():
        if x and G.element_order(x) == p:
            found.setdefault(generated_subgroup(G, [x]).mask, None)
    return sorted(found)


def strongly_p_embedded(G: FiniteGroup, p: int) -> SpeResult:
    """
    Phương pháp đồ thị: đỉnh là các nhóm con cấp p, cạnh X-Y khi <X, Y> là p-nhóm.

    Có nhóm con nhúng p-mạnh khi đồ thị không liên thông; nhân chứng là bộ ổn định
    (theo tập) của thành phần chứa đỉnh đầu tiên, được kiểm lại theo định nghĩa.
    """
    if G.order % p:
        return SpeResult(False)
    vertices = _order_p_subgroups(G, p)
    graph = nx.Graph()
    graph.add_nodes_from(vertices)
    for i, X in enumerate(vertices):
        for Y in vertices[i + 1:]:
            joined = generated_subgroup(G, [*_generator(X), *_generator(Y)])
            if is_p_power(joined.order, p):
                graph.add_edge(X, Y)

    if nx.is_connected(graph):
        return SpeResult(False)

    component = set(nx.node_connected_component(graph, vertices[0]))
    stabilizer = 0
    for g in G.elements():
        if all(conjugate_mask(G, X, g) in component for X in component):
            stabilizer |= 1 << g
    H = Subgroup(G, stabilizer)
    if not satisfies_definition(G, H, p):
        raise InternalInvariantViolation(
            f"Bộ ổn định thành phần (cấp {H.order}) không nhúng {p}-mạnh trong {G.name}"
        )
    logger.debug(f"{G.name}: {nx.number_connected_components(graph)} thành phần, nhân chứng cấp {H.order}")
    return SpeResult(True, H)


def _generator(mask: int) -> List[int]:
    # nhóm cấp p được sinh bởi bất kỳ phần tử khác đơn vị nào
    low = mask & ~1
    return [(low & -low).bit_length() - 1]


def strongly_p_embedded_bruteforce(G: FiniteGroup, p: int) -> SpeResult:
    """Quét mọi nhóm con thực sự H với p | |H| theo định nghĩa"""
    for H in all_subgroups(G):
        if satisfies_definition(G, H, p):
            return SpeResult(True, H)
    return SpeResult(False)


def intersection_generators(G: FiniteGroup, N: Subgroup, T: Subgroup, Q: Subgroup) -> List[int]:
    """{x in N | T ∩ T^x > Q} theo thứ tự chỉ số (Q chuẩn tắc trong N, Q <= T)"""
    return [x for x in N.members if (T.mask & conjugate_mask(G, T.mask, x)) != Q.mask]


def sylow_intersection_generators(G: FiniteGroup, S: Subgroup) -> List[int]:
    """X = {x in G | S ∩ S^x != 1}; đối xứng dưới nghịch đảo"""
    return intersection_generators(G, G.whole, S, G.trivial)


def express_word(G: FiniteGroup, X: Sequence[int], g: int) -> Word:
    """
    Từ ngắn nhất trên X có tích bằng g (BFS từ đơn vị, hòa thì theo thứ tự trong X).

    Raises:
        NotInSpan: g không thuộc <X>
    """
    if g == 0:
        return ()
    parent: Dict[int, tuple] = {0: (None, None)}
    frontier = [0]
    while frontier and g not in parent:
        nxt = []
        for y in frontier:
            for x in X:
                z = G.mul(y, x)
                if z not in parent:
                    parent[z] = (y, x)
                    nxt.append(z)
        frontier = nxt
    if g not in parent:
        raise NotInSpan(f"{G.label(g)} không thuộc nhóm con sinh bởi X trong {G.name}")

    word: List[int] = []
    node = g
    while node != 0:
        prev, letter = parent[node]
        word.append(letter)
        node = prev
    return tuple(reversed(word))
