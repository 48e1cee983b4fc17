"""Conversion between byte strings and field symbols.

Bytes are read as one little-endian integer and cut into chunks of
``floor(log2 q)`` bits, least significant chunk first, so every symbol is
below ``q``.
"""

from __future__ import annotations

from typing import Sequence

from .errors import CodeError


def bits_per_symbol(q: int) -> int:
    return q.bit_length() - 1


def pack_bytes(data: bytes, q: int, multiple: int = 1) -> tuple[list[int], int]:
    """Symbols for ``data``, zero padded to a multiple of ``multiple``.

    Returns ``(symbols, pad)`` where ``pad`` counts the padding symbols.
    """
    b = bits_per_symbol(q)
    if b < 1:
        raise CodeError(f"GF({q}) cannot carry a full bit per symbol")
    total_bits = 8 * len(data)
    count = -(-total_bits // b)
    pad = (-count) % multiple
    if count == 0:
        pad = multiple
    value = int.from_bytes(data, "little")
    mask = (1 << b) - 1
    symbols = [(value >> (j * b)) & mask for j in range(count)]
    return symbols + [0] * pad, pad


def unpack_bytes(symbols: Sequence[int], q: int, length: int) -> bytes:
    """Inverse of :func:`pack_bytes` given the original byte length."""
    b = bits_per_symbol(q)
    value = 0
    for j, s in enumerate(symbols):
        if not 0 <= s < (1 << b):
            raise CodeError(f"symbol {s} does not fit in {b} bits")
        value |= s << (j * b)
    if value >> (8 * length):
        raise CodeError("decoded symbols carry data past the recorded length")
    return value.to_bytes(length, "little")
