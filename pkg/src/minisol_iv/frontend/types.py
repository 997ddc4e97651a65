"""MiniSol types and their value domains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

INT_WIDTHS = (8, 16, 32, 64, 128, 256)


@dataclass(frozen=True)
class IntType:
    signed: bool
    bits: int

    def __str__(self) -> str:
        return f"{'int' if self.signed else 'uint'}{self.bits}"


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class AddressType:
    def __str__(self) -> str:
        return "address"


@dataclass(frozen=True)
class EnumType:
    name: str
    variants: Tuple[str, ...]

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ArrayType:
    elem: "MiniSolType"
    length: Optional[int] = None  # None for dynamic arrays

    def __str__(self) -> str:
        return f"{self.elem}[{'' if self.length is None else self.length}]"


@dataclass(frozen=True)
class MappingType:
    key: "MiniSolType"
    value: "MiniSolType"

    def __str__(self) -> str:
        return f"mapping({self.key} => {self.value})"


@dataclass(frozen=True)
class StructType:
    name: str
    fields: Tuple[Tuple[str, "MiniSolType"], ...]

    def field(self, name: str) -> Optional["MiniSolType"]:
        for fname, fty in self.fields:
            if fname == name:
                return fty
        return None

    def __str__(self) -> str:
        return self.name


# Types below never hold analyzable values; they only annotate expressions
# such as string messages, callees and the `msg` magic variable.


@dataclass(frozen=True)
class StringType:
    def __str__(self) -> str:
        return "string"


@dataclass(frozen=True)
class TupleType:
    items: Tuple["MiniSolType", ...]

    def __str__(self) -> str:
        return "(" + ", ".join(map(str, self.items)) + ")"


@dataclass(frozen=True)
class BuiltinType:
    """Type of magic names (`msg`) and builtin callees (`payable`, `.transfer`)."""

    name: str

    def __str__(self) -> str:
        return f"builtin {self.name}"


@dataclass(frozen=True)
class TypeRefType:
    """Type of an expression naming a type, e.g. `Options` in `Options(x)`."""

    target: "MiniSolType"

    def __str__(self) -> str:
        return f"type({self.target})"


MiniSolType = Union[
    IntType, BoolType, AddressType, EnumType, ArrayType, MappingType, StructType,
    StringType, TupleType, BuiltinType, TypeRefType,
]

UINT256 = IntType(False, 256)
INT256 = IntType(True, 256)
BOOL = BoolType()
ADDRESS = AddressType()
STRING = StringType()
BYTES = BuiltinType("bytes")
VOID = TupleType(())

ScalarType = (IntType, BoolType, AddressType, EnumType)


def is_scalar(t: MiniSolType) -> bool:
    return isinstance(t, ScalarType)


def is_integer(t: MiniSolType) -> bool:
    return isinstance(t, IntType)


def bounds(t: MiniSolType) -> Tuple[int, int]:
    """Inclusive value domain of a scalar type."""
    if isinstance(t, IntType):
        if t.signed:
            return -(1 << (t.bits - 1)), (1 << (t.bits - 1)) - 1
        return 0, (1 << t.bits) - 1
    if isinstance(t, BoolType):
        return 0, 1
    if isinstance(t, AddressType):
        return 0, (1 << 160) - 1
    if isinstance(t, EnumType):
        return 0, len(t.variants) - 1
    raise TypeError(f"{t} has no scalar domain")


def elementary(name: str) -> Optional[MiniSolType]:
    """Map an elementary type keyword (`uint`, `int64`, `bool`...) to its type."""
    if name == "bool":
        return BOOL
    if name == "address":
        return ADDRESS
    for prefix, signed in (("uint", False), ("int", True)):
        if name.startswith(prefix):
            rest = name[len(prefix):]
            if rest == "":
                return IntType(signed, 256)
            if rest.isdigit() and int(rest) in INT_WIDTHS:
                return IntType(signed, int(rest))
    return None


def nesting_depth(t: MiniSolType) -> int:
    if isinstance(t, ArrayType):
        return 1 + nesting_depth(t.elem)
    if isinstance(t, MappingType):
        return 1 + nesting_depth(t.value)
    if isinstance(t, StructType):
        return 1 + max((nesting_depth(f) for _, f in t.fields), default=0)
    return 0
