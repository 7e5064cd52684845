"""Translations between programs and circuits."""

from .forward import CompiledProgram, circuit_to_algebra, prepare
from .lower import LoweredCircuit, algebra_to_circuit, basic_to_circuit
from .roundtrip import RoundtripReport, roundtrip_check

__all__ = [
    "CompiledProgram", "circuit_to_algebra", "prepare",
    "LoweredCircuit", "algebra_to_circuit", "basic_to_circuit",
    "RoundtripReport", "roundtrip_check",
]
