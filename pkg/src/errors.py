"""
Mô hình lỗi của toolkit.

Mỗi lỗi mang một `code` ổn định (in ra JSON trên stderr) và một `exit_code`
cho CLI: 1 internal invariant, 2 spec, 3 domain, 4 functor.
"""

from typing import Any, Dict


class ToolkitError(RuntimeError):
    """Lỗi gốc của toolkit"""

    code = "internal"
    exit_code = 1

    def to_payload(self) -> Dict[str, Any]:
        return {"error": self.code, "detail": str(self)}


# === Internal invariants (exit 1) ===

class InternalInvariantViolation(ToolkitError):
    """Một bất biến nội bộ bị vi phạm - luôn là bug"""

    code = "internal_invariant"


class NotConjugatable(ToolkitError):
    """sylow_conjugator được gọi với tiền điều kiện sai"""

    code = "not_conjugatable"


# === Spec errors (exit 2) ===

class SpecError(ToolkitError):
    code = "spec"
    exit_code = 2


class InvalidSpec(SpecError):
    code = "invalid_spec"


class GroupTooLarge(SpecError):
    code = "group_too_large"


class PNotDividing(SpecError):
    code = "p_not_dividing"


class DeltaEmpty(SpecError):
    code = "delta_empty"


class NotNormal(SpecError):
    code = "not_normal"


class ActionInvalid(SpecError):
    code = "action_invalid"


class BoundExceeded(SpecError):
    code = "bound_exceeded"


class SBoundExceeded(BoundExceeded):
    code = "s_bound_exceeded"


class EmptyWord(SpecError):
    code = "empty_word"


class ModuleNotPGroup(SpecError):
    code = "module_not_p_group"


# === Domain errors (exit 3) ===

class DomainError(ToolkitError):
    code = "domain"
    exit_code = 3


class NotInLocality(DomainError):
    code = "not_in_locality"


class NotInDomain(DomainError):
    code = "not_in_domain"


class PNotInDelta(DomainError):
    code = "p_not_in_delta"


class NotAMorphism(DomainError):
    code = "not_a_morphism"


class NotInSpan(DomainError):
    code = "not_in_span"


class InvalidInput(DomainError):
    code = "invalid_input"


class PreconditionViolated(DomainError):
    code = "precondition_violated"


# === Functor errors (exit 4) ===

class FunctorInconsistent(ToolkitError):
    code = "functor_inconsistent"
    exit_code = 4
