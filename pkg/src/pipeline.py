import uuid
import json
import logging
import sys
import pathlib
from dataclasses import dataclass
from datetime import datetime
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Union

from pydantic import ValidationError
from slugify import slugify
from sympy import factorint

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from src.models import (
    CertificateModel, FunctorSpec, GroupSpec, LimitReport, LocalitySpec, ModuleSpec,
    RunRecord, RunSpec, RunStatus,
)
from src.errors import InternalInvariantViolation, InvalidSpec, ToolkitError
from src.finite_group import FiniteGroup, Subgroup, all_subgroups, fingerprint, p_part
from src.group_library import group_library
from src.locality import DeltaSpecLike, Locality, build_group_locality, verify_axioms
from src.alperin import (
    certificate_from_model, certificate_to_model, decompose, essentials, verify_certificate,
)
from src.transporter import (
    FunctorPres, TransporterCat, build_transporter, fixed_point_functor, functor_from_spec,
    inverse_limit, restrict_functor, t_essential_subcategory,
)
from src.cohomology import (
    GModule, check_cartan_eilenberg, cohomology_functor, module_from_spec, permutation_module, trivial_module,
)

logger = logging.getLogger(__name__)

BUILTIN_FUNCTORS = {"fixed-points": None, "h0": 0, "h1": 1, "h2": 2}


def _read_json(path: str, what: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise InvalidSpec(f"Không đọc được {what} {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidSpec(f"{what} {path} không phải JSON hợp lệ: {e}") from e


def _parse_delta(text: str) -> DeltaSpecLike:
    if text in ("all", "nontrivial"):
        return text
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise InvalidSpec(f"--delta phải là all, nontrivial hoặc JSON, nhận {text!r}") from None


def _generator_sets(subgroups: List[Subgroup]) -> List[List[str]]:
    return [H.generator_labels() for H in sorted(subgroups, key=lambda H: H.sort_key)]


@dataclass
class RunContext:
    """Đầu vào đã kiểm tra của một lần chạy; locality được dựng khi cần"""

    spec: RunSpec
    group: FiniteGroup
    p: Optional[int]
    delta: DeltaSpecLike
    S: Optional[List[str]] = None

    @cached_property
    def locality(self) -> Locality:
        if self.p is None:
            raise InvalidSpec("Lệnh này cần số nguyên tố (--p hoặc trường p trong --in)")
        S = self.group.subgroup_from_strings(self.S) if self.S is not None else None
        return build_group_locality(self.group, self.p, self.delta, S=S)

    def module(self) -> GModule:
        name = self.spec.module
        if name == "trivial":
            return trivial_module(self.group, (self.locality.p,))
        if name == "permutation":
            return permutation_module(self.group, self.locality.p)
        data = _read_json(name, "module")
        try:
            return module_from_spec(self.group, ModuleSpec(**data))
        except TypeError:
            raise InvalidSpec(f"Module {name} phải là một object JSON") from None


class Pipeline:
    """
    Điều phối một lần chạy: load spec -> dựng cấu trúc -> tính -> kiểm tra -> payload.
    Nhật ký chạy chỉ đi vào logger, không vào kết quả JSON.
    """

    def __init__(self):
        self.runs: Dict[str, RunRecord] = {}
        self._handlers: Dict[str, Callable[[RunContext, RunRecord], Any]] = {
            "group info": self._cmd_group_info,
            "locality build": self._cmd_locality_build,
            "locality verify": self._cmd_locality_verify,
            "essentials": self._cmd_essentials,
            "decompose": self._cmd_decompose,
            "verify-cert": self._cmd_verify_cert,
            "transporter info": self._cmd_transporter_info,
            "limit": self._cmd_limit,
            "cohomology": self._cmd_cohomology,
        }

    def _new_run(self, spec: RunSpec) -> RunRecord:
        run_id = f"run_{datetime.now().strftime('%Y%m%d%H%M%S')}_{slugify(spec.command)}_{uuid.uuid4().hex[:4]}"
        record = RunRecord(id=run_id, command=spec.command)
        self.runs[run_id] = record
        return record

    async def run(self, spec: RunSpec) -> Dict[str, Any]:
        """
        Chạy một lệnh và trả payload JSON (dict hoặc list) kèm cờ passed cho lệnh kiểm tra
        """
        record = self._new_run(spec)
        try:
            logger.info(f"=== BẮT ĐẦU {spec.command.upper()} ({record.id}) ===")
            record.update_status(RunStatus.RUNNING)

            context = await self._stage_load(record, spec)
            result = await self._stage_compute(record, context)

            record.update_status(RunStatus.COMPLETED)
            logger.info(f"=== HOÀN THÀNH {record.id} ===")
            return result

        except (ToolkitError, ValidationError) as e:
            logger.error(f"[{record.id}] Lỗi: {e}")
            record.update_status(RunStatus.FAILED)
            record.add_log(f"Lỗi: {e}")
            raise
        finally:
            for line in record.processing_logs:
                logger.debug(f"[{record.id}] {line}")

    async def _stage_load(self, record: RunRecord, spec: RunSpec) -> RunContext:
        """
        Giai đoạn 1: đọc spec (--in hoặc --group) và áp tùy chọn dòng lệnh
        """
        record.add_log("Bắt đầu load spec")
        group: Union[GroupSpec, str]
        p = spec.p
        delta: DeltaSpecLike = "all"
        S = None
        if spec.input_path:
            data = _read_json(spec.input_path, "spec")
            if isinstance(data, dict) and "group" in data:
                loc = LocalitySpec(**data)
                group, S, delta = loc.group, loc.S, loc.delta
                p = p if p is not None else loc.p
            elif isinstance(data, dict):
                group = GroupSpec(**data)
            else:
                raise InvalidSpec(f"{spec.input_path} phải chứa một object JSON")
        else:
            group = spec.group
        if spec.delta is not None:
            delta = _parse_delta(spec.delta)

        G = group_library.resolve(group)
        record.add_log(f"Đã load nhóm {G.name} cấp {G.order}")
        return RunContext(spec=spec, group=G, p=p, delta=delta, S=S)

    async def _stage_compute(self, record: RunRecord, context: RunContext) -> Any:
        """
        Giai đoạn 2-4: dựng cấu trúc, tính, tự kiểm tra kết quả
        """
        handler = self._handlers[context.spec.command]
        result = handler(context, record)
        record.add_log("Đã tính xong")
        return result

    # === Lệnh ===

    def _cmd_group_info(self, ctx: RunContext, record: RunRecord) -> Dict[str, Any]:
        G = ctx.group
        order, histogram, abelian = fingerprint(G)
        return {
            "name": G.name,
            "order": order,
            "abelian": abelian,
            "element_orders": {str(k): v for k, v in histogram},
            "sylow": {str(q): p_part(order, q) for q in sorted(factorint(order))},
            "subgroups": len(all_subgroups(G)),
        }

    def _cmd_locality_build(self, ctx: RunContext, record: RunRecord) -> Dict[str, Any]:
        L = ctx.locality
        record.add_log(f"Đã dựng {L.name}")
        return {
            "group": ctx.group.name,
            "p": L.p,
            "order": L.order,
            "S": L.S.generator_labels(),
            "delta": _generator_sets(list(L.delta)),
        }

    def _cmd_locality_verify(self, ctx: RunContext, record: RunRecord) -> Dict[str, Any]:
        report = verify_axioms(ctx.locality, ctx.spec.maxlen)
        record.add_log(f"Kiểm tra tiên đề: passed={report.passed}")
        return report.model_dump()

    def _cmd_essentials(self, ctx: RunContext, record: RunRecord) -> List[List[str]]:
        found = essentials(ctx.locality)
        record.add_log(f"{len(found)} nhóm con essential")
        return _generator_sets(found)

    def _cmd_decompose(self, ctx: RunContext, record: RunRecord) -> Dict[str, Any]:
        L = ctx.locality
        g = ctx.group.parse_element(ctx.spec.element)
        cert = decompose(L, g)
        report = verify_certificate(L, cert)
        if not report.passed:
            raise InternalInvariantViolation(
                f"Chứng chỉ cho {ctx.spec.element} không qua kiểm tra: {report.violations[0].clause}"
            )
        record.add_log(f"Chứng chỉ {len(cert.factors)} nhân tử")
        return certificate_to_model(L, cert).model_dump()

    def _cmd_verify_cert(self, ctx: RunContext, record: RunRecord) -> Dict[str, Any]:
        L = ctx.locality
        model = CertificateModel(**_read_json(ctx.spec.cert_path, "chứng chỉ"))
        report = verify_certificate(L, certificate_from_model(L, model))
        record.add_log(f"Kiểm tra chứng chỉ: passed={report.passed}")
        return report.model_dump()

    def _category(self, ctx: RunContext) -> TransporterCat:
        T = build_transporter(ctx.locality)
        return t_essential_subcategory(T) if ctx.spec.essential_only else T

    def _cmd_transporter_info(self, ctx: RunContext, record: RunRecord) -> Dict[str, Any]:
        T = self._category(ctx)
        return {
            "name": T.name,
            "objects": [
                {"id": i, "order": P.order, "generators": P.generator_labels()} for i, P in enumerate(T.objects)
            ],
            "hom": [{"source": i, "target": j, "count": len(T.mor(i, j))} for (i, j) in T.pairs()],
            "morphisms": T.morphism_count,
        }

    def _functor(self, ctx: RunContext, T: TransporterCat) -> FunctorPres:
        source = ctx.spec.functor
        if source not in BUILTIN_FUNCTORS:
            data = _read_json(source, "hàm tử")
            return functor_from_spec(T, FunctorSpec(**data))
        degree = BUILTIN_FUNCTORS[source]
        if degree is None:
            return fixed_point_functor(T, ctx.module())
        return cohomology_functor(T, ctx.module(), degree)

    def _cmd_limit(self, ctx: RunContext, record: RunRecord) -> Dict[str, Any]:
        T = build_transporter(ctx.locality)
        F = self._functor(ctx, T)
        Te = t_essential_subcategory(T)
        lim_Te = inverse_limit(Te, restrict_functor(F, Te))
        if ctx.spec.essential_only:
            report = LimitReport(lim_Te=lim_Te.invariant_factors())
        else:
            lim_T = inverse_limit(T, F)
            report = LimitReport(
                lim_T=lim_T.invariant_factors(), lim_Te=lim_Te.invariant_factors(),
                equal=lim_T.is_isomorphic(lim_Te),
            )
        record.add_log(f"lim {F.name}: {report.model_dump(exclude_none=True)}")
        return report.model_dump(exclude_none=True)

    def _cmd_cohomology(self, ctx: RunContext, record: RunRecord) -> Dict[str, Any]:
        L = ctx.locality
        report = check_cartan_eilenberg(ctx.group, L.p, ctx.module(), ctx.spec.degree)
        record.add_log(f"Cartan-Eilenberg bậc {report.degree}: equal={report.equal}")
        return report.model_dump()

    # === Tra cứu ===

    def get_run_status(self, run_id: str) -> Optional[RunRecord]:
        return self.runs.get(run_id)

    def get_all_runs(self) -> Dict[str, RunRecord]:
        return self.runs.copy()

    def get_statistics(self) -> Dict[str, Dict[str, int]]:
        """
        Thống kê số lần chạy theo lệnh và trạng thái
        """
        stats: Dict[str, Dict[str, int]] = {}
        for record in self.runs.values():
            entry = stats.setdefault(record.command, {"total": 0, **{s.value: 0 for s in RunStatus}})
            entry["total"] += 1
            entry[record.status.value] += 1
        return stats


# Singleton instance
pipeline = Pipeline()
