from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Dict, List, Literal, Optional, Union
from datetime import datetime
from enum import Enum


class StrictModel(BaseModel):
    """Model đầu vào: từ chối mọi trường lạ"""
    model_config = ConfigDict(extra="forbid")


# === Đầu vào ===

class GroupSpec(StrictModel):
    """Mô tả nhóm hoán vị (chu trình 1-based)"""
    name: str = Field(..., description="Tên nhóm")
    kind: Literal["symmetric", "dihedral", "cyclic", "permutation"] = Field(..., description="Loại nhóm")
    n: int = Field(..., ge=1, description="Số điểm")
    generators: List[str] = Field(default_factory=list, description="Phần tử sinh, ví dụ \"(1 2 3 4)\"")

    @model_validator(mode="after")
    def _generators_only_for_permutation(self):
        if self.kind != "permutation" and self.generators:
            raise ValueError(f"generators chỉ dùng cho kind=permutation, không phải {self.kind}")
        return self


class OvergroupsOfSpec(StrictModel):
    overgroups_of: List[str] = Field(..., description="Phần tử sinh của nhóm con đáy")


class ExplicitDeltaSpec(StrictModel):
    explicit: List[List[str]] = Field(..., min_length=1, description="Danh sách tập sinh")


DeltaSpec = Union[Literal["all", "nontrivial"], OvergroupsOfSpec, ExplicitDeltaSpec]


class LocalitySpec(StrictModel):
    """Đầu vào locality: nhóm xung quanh, số nguyên tố, (S), Delta"""
    group: Union[GroupSpec, str] = Field(..., description="GroupSpec hoặc tên trong thư viện")
    p: int = Field(..., ge=2)
    S: Optional[List[str]] = Field(None, description="Phần tử sinh của S (tùy chọn)")
    delta: DeltaSpec = "all"


class ModuleSpec(StrictModel):
    """Module hữu hạn: các cấp cyclic và tác động trên phần tử sinh"""
    orders: List[int] = Field(..., description="Cấp của các thành phần cyclic")
    action: Dict[str, List[List[int]]] = Field(default_factory=dict, description="Nhãn phần tử sinh -> ma trận")

    @field_validator("orders")
    @classmethod
    def _positive_orders(cls, v):
        if any(m < 2 for m in v):
            raise ValueError("Mọi cấp cyclic phải >= 2")
        return v


class FunctorSpec(StrictModel):
    """Hàm tử do người dùng cung cấp trên một transporter category"""
    values: Dict[str, List[int]] = Field(..., description="object-id -> các cấp cyclic")
    maps: Dict[str, List[List[int]]] = Field(..., description="morphism-id \"i:j:<nhãn>\" -> ma trận")


# === Chứng chỉ ===

class FactorModel(BaseModel):
    Q: List[str] = Field(..., description="Tập sinh của Q_i")
    x: str = Field(..., description="Phần tử g_i")


class CertificateModel(BaseModel):
    target: str
    factors: List[FactorModel] = Field(default_factory=list)


# === Báo cáo ===

class Violation(BaseModel):
    clause: str
    witness: List[str] = Field(default_factory=list)
    detail: str = ""


class VerificationReport(BaseModel):
    """Kết quả kiểm tra dạng báo cáo: không ném lỗi, liệt kê mọi vi phạm"""
    subject: str
    passed: bool = True
    checked: int = 0
    violations: List[Violation] = Field(default_factory=list)

    def fail(self, clause: str, witness: Optional[List[str]] = None, detail: str = "") -> None:
        self.violations.append(Violation(clause=clause, witness=witness or [], detail=detail))
        self.passed = False


class LimitReport(BaseModel):
    lim_T: Optional[List[int]] = None
    lim_Te: List[int]
    equal: Optional[bool] = None


class CartanEilenbergReport(BaseModel):
    degree: int
    H: List[int]
    lim_T: List[int]
    lim_Te: List[int]
    equal: bool


# === Điều phối ===

class RunStatus(str, Enum):
    """Trạng thái của một lần chạy"""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class RunSpec(StrictModel):
    """Tùy chọn của một lần gọi CLI, được kiểm tra trước mọi tính toán"""
    command: Literal[
        "group info", "locality build", "locality verify", "essentials", "decompose",
        "verify-cert", "transporter info", "limit", "cohomology",
    ]
    input_path: Optional[str] = None
    group: Optional[str] = None
    p: Optional[int] = Field(None, ge=2)
    delta: Optional[str] = None
    degree: int = Field(1, ge=0)
    maxlen: Optional[int] = Field(None, ge=3)
    element: Optional[str] = None
    cert_path: Optional[str] = None
    functor: str = "h1"
    module: str = "trivial"
    essential_only: bool = False
    output_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_sources(self):
        if self.input_path is None and self.group is None:
            raise ValueError("Cần --in hoặc --group")
        if self.command == "decompose" and not self.element:
            raise ValueError("decompose cần --element")
        if self.command == "verify-cert" and not self.cert_path:
            raise ValueError("verify-cert cần --cert")
        return self


class RunRecord(BaseModel):
    """Nhật ký của một lần chạy"""
    id: str
    command: str
    status: RunStatus = Field(default=RunStatus.PENDING)
    created_at: datetime = Field(default_factory=datetime.now)
    updated_at: datetime = Field(default_factory=datetime.now)
    processing_logs: List[str] = Field(default_factory=list)

    def add_log(self, message: str):
        """Thêm log vào quá trình xử lý"""
        self.processing_logs.append(f"{datetime.now().isoformat()}: {message}")
        self.updated_at = datetime.now()

    def update_status(self, new_status: RunStatus):
        """Cập nhật trạng thái và thêm log"""
        self.status = new_status
        self.add_log(f"Cập nhật trạng thái: {new_status.value}")
