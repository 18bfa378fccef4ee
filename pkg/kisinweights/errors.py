from __future__ import annotations


class KisinError(RuntimeError):
    kind = "error"

    @property
    def detail(self) -> str:
        return str(self) or self.__class__.__name__


class StructuralError(KisinError):
    kind = "structural"


class DomainError(KisinError):
    kind = "domain"


class TruncationError(KisinError):
    kind = "truncation"


class ResourceError(KisinError):
    kind = "resource"


class DegenerateModuleError(KisinError):
    kind = "degenerate-module"


class NotInKernelError(KisinError):
    kind = "not-in-kernel"


class InternalError(KisinError):
    kind = "internal"
