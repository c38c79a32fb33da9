import json
import os
import re
from typing import Dict, List, Optional, Union
import sys
import pathlib

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from pydantic import ValidationError

from src.models import GroupSpec
from src.finite_group import FiniteGroup
from src.errors import InvalidSpec
from config.settings import settings
import logging

logger = logging.getLogger(__name__)

_CYCLIC_NAME = re.compile(r"^C_?(\d+)$")

# Thư viện mặc định khi không có group_library.json
DEFAULT_GROUPS: List[Dict] = [
    {"name": "S3", "kind": "symmetric", "n": 3},
    {"name": "S4", "kind": "symmetric", "n": 4},
    {"name": "D8", "kind": "dihedral", "n": 4},
    {"name": "D12", "kind": "dihedral", "n": 6},
    {"name": "A4", "kind": "permutation", "n": 4, "generators": ["(1 2 3)", "(2 3 4)"]},
    # SL(2,3) tác động lên 8 vector khác 0 của F_3^2
    {"name": "SL23", "kind": "permutation", "n": 8, "generators": ["(3 5 8)(4 6 7)", "(1 5 7)(2 6 8)"]},
]


def _cycle(points: List[int]) -> str:
    return "(" + " ".join(str(i) for i in points) + ")"


def generators_for(spec: GroupSpec) -> List[str]:
    """Phần tử sinh dạng chu trình cho từng loại nhóm"""
    n = spec.n
    if spec.kind == "permutation":
        return list(spec.generators)
    if spec.kind == "cyclic":
        return [_cycle(list(range(1, n + 1)))] if n > 1 else []
    if spec.kind == "symmetric":
        if n == 1:
            return []
        return ["(1 2)", _cycle(list(range(1, n + 1)))] if n > 2 else ["(1 2)"]
    # dihedral trên n điểm: quay và phản xạ i -> n + 2 - i (giữ điểm 1)
    if n < 3:
        raise InvalidSpec(f"Nhóm dihedral cần n >= 3, nhận {n}")
    reflection = "".join(_cycle([i, n + 2 - i]) for i in range(2, n + 1) if i < n + 2 - i)
    return [_cycle(list(range(1, n + 1))), reflection]


def build_group(spec: GroupSpec) -> FiniteGroup:
    """Dựng FiniteGroup từ GroupSpec"""
    return FiniteGroup.from_cycle_strings(generators_for(spec), spec.n, name=spec.name)


class GroupLibrary:
    """
    Quản lý thư viện nhóm dựng sẵn (S3, S4, D8, D12, A4, SL23, C_n)
    """

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file or os.path.join(root_dir, settings.library_config_file)
        self.specs: Dict[str, GroupSpec] = {}
        self._groups: Dict[str, FiniteGroup] = {}
        self._load_library_config()

    def _load_library_config(self):
        """
        Load thư viện nhóm từ group_library.json
        """
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    data = json.load(f)

                for group_data in data.get('groups', []):
                    spec = GroupSpec(**group_data)
                    self.specs[spec.name] = spec

                logger.info(f"Đã load {len(self.specs)} nhóm từ {os.path.basename(self.config_file)}")
            else:
                logger.warning(f"Không tìm thấy {self.config_file}, dùng thư viện mặc định")
                self._create_default_library()

        except (OSError, json.JSONDecodeError, ValidationError) as e:
            logger.error(f"Lỗi khi load thư viện nhóm: {str(e)}")
            self._create_default_library()

    def _create_default_library(self):
        """
        Tạo thư viện mặc định khi không có file cấu hình
        """
        self.specs = {g["name"]: GroupSpec(**g) for g in DEFAULT_GROUPS}
        logger.info(f"Đã tạo thư viện mặc định với {len(self.specs)} nhóm")

    def get_spec(self, name: str) -> Optional[GroupSpec]:
        """
        Lấy GroupSpec theo tên; C_n / Cn được sinh theo yêu cầu
        """
        if name in self.specs:
            return self.specs[name]
        match = _CYCLIC_NAME.match(name)
        if match:
            return GroupSpec(name=name, kind="cyclic", n=int(match.group(1)))
        return None

    def get_group(self, name: str) -> FiniteGroup:
        """
        Lấy nhóm theo tên (có cache)
        """
        if name not in self._groups:
            spec = self.get_spec(name)
            if spec is None:
                raise InvalidSpec(f"Không có nhóm {name!r} trong thư viện")
            self._groups[name] = build_group(spec)
            logger.info(f"Đã dựng nhóm {name} cấp {self._groups[name].order}")
        return self._groups[name]

    def resolve(self, group: Union[GroupSpec, str]) -> FiniteGroup:
        """
        Nhận tên thư viện hoặc GroupSpec đầy đủ
        """
        if isinstance(group, str):
            return self.get_group(group)
        return build_group(group)

    def get_all_names(self) -> List[str]:
        return list(self.specs)


# Singleton instance
group_library = GroupLibrary()
