"""
Data Loading Module for Sparse Walsh-Hadamard Recovery
======================================================
Reads and writes the text formats for signals, sketches and condenser descriptors.
"""

from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from src.condenser import (
    CertifiedRandomCondenser, GuvCondenser, GuvParams, LeftoverHashCondenser, LinearCondenser,
)
from src.errors import FileFormatError
from src.evaluate import tail_l1
from src.field import Poly
from src.gf2 import F2Matrix
from src.sketch import Sketch
from src.wht import DenseSignal

PathLike = Union[str, Path]


def _format_number(value) -> str:
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _parse_number(token: str):
    try:
        return int(token)
    except ValueError:
        try:
            return float(token)
        except ValueError as exc:
            raise FileFormatError(f"not a number: {token!r}") from exc


def _numbers_to_array(numbers: List) -> np.ndarray:
    if all(isinstance(v, int) for v in numbers):
        return np.asarray(numbers, dtype=np.int64)
    return np.asarray(numbers, dtype=np.float64)


def _read_lines(filepath: PathLike) -> List[str]:
    path = Path(filepath)
    if not path.exists():
        raise FileFormatError(f"{path} does not exist")
    return [line.strip() for line in path.read_text().splitlines()]


# =============================================================================
# SIGNALS
# =============================================================================

def load_signal(filepath: PathLike) -> DenseSignal:
    """
    Load a signal file: line 1 ``n``, line 2 ``dense`` or ``sparse``, then either
    2^n values or ``index value`` lines.

    Args:
        filepath: path to the signal file

    Returns:
        DenseSignal (int64 when every value is an integer)
    """
    lines = [line for line in _read_lines(filepath) if line]
    if len(lines) < 2:
        raise FileFormatError(f"{filepath}: missing header")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise FileFormatError(f"{filepath}: bad dimension line {lines[0]!r}") from exc
    kind = lines[1]
    body = lines[2:]
    N = 1 << n
    if kind == "dense":
        if len(body) != N:
            raise FileFormatError(f"{filepath}: expected {N} values, found {len(body)}")
        values = _numbers_to_array([_parse_number(tok) for tok in body])
    elif kind == "sparse":
        pairs = []
        for line in body:
            parts = line.split()
            if len(parts) != 2:
                raise FileFormatError(f"{filepath}: bad sparse line {line!r}")
            index = int(parts[0])
            if not 0 <= index < N:
                raise FileFormatError(f"{filepath}: index {index} outside [0, {N})")
            pairs.append((index, _parse_number(parts[1])))
        values = _numbers_to_array([v for _, v in pairs] or [0])
        dense = np.zeros(N, dtype=values.dtype)
        for index, value in pairs:
            dense[index] += value
        values = dense
    else:
        raise FileFormatError(f"{filepath}: unknown layout {kind!r}")
    return DenseSignal(n, values)


def save_signal(signal: DenseSignal, filepath: PathLike, layout: str = "sparse"):
    """Write a signal file; ``sparse`` lists the nonzero entries in index order."""
    lines = [str(signal.n), layout]
    if layout == "dense":
        lines += [_format_number(v) for v in signal.values]
    elif layout == "sparse":
        nz = np.flatnonzero(signal.values)
        lines += [f"{i} {_format_number(signal.values[i])}" for i in nz]
    else:
        raise ValueError(f"unknown layout {layout!r}")
    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    Path(filepath).write_text("\n".join(lines) + "\n")


def get_signal_summary(signal: DenseSignal, k: int) -> Dict:
    """
    Generate a summary of a signal.

    Args:
        signal: the signal
        k: sparsity the tail is measured against

    Returns:
        Dictionary with signal statistics
    """
    values = signal.values
    summary = {
        'n': signal.n,
        'length': signal.N,
        'nnz': int(np.count_nonzero(values)),
        'l1_norm': float(np.abs(values).sum()),
        'max_abs': float(np.abs(values).max()) if values.size else 0.0,
        'tail_l1': tail_l1(values, k),
        'integer': signal.is_integral(),
    }

    print("\n" + "="*50)
    print("SIGNAL SUMMARY")
    print("="*50)
    print(f"Length: 2^{summary['n']} = {summary['length']:,}")
    print(f"Nonzeros: {summary['nnz']:,}")
    print(f"l1 norm: {summary['l1_norm']:g}   max |x|: {summary['max_abs']:g}")
    print(f"Tail beyond k={k}: {summary['tail_l1']:g}")
    print("="*50 + "\n")

    return summary


# =============================================================================
# SKETCHES
# =============================================================================

def save_sketch(sketch: Sketch, filepath: PathLike):
    """Header ``n r D tensor_flag`` then entries in layout order, one per line."""
    if sketch.seeds != tuple(range(sketch.D)):
        raise ValueError("only full sketches (every seed) have a file format")
    lines = [f"{sketch.n} {sketch.r} {sketch.D} {int(sketch.with_tensor)}"]
    lines += [_format_number(v) for v in sketch.entries.ravel()]
    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    Path(filepath).write_text("\n".join(lines) + "\n")


def load_sketch(filepath: PathLike) -> Sketch:
    lines = [line for line in _read_lines(filepath) if line]
    try:
        n, r, D, flag = (int(tok) for tok in lines[0].split())
    except (ValueError, IndexError) as exc:
        raise FileFormatError(f"{filepath}: bad sketch header") from exc
    rows = n + 1 if flag else 1
    expected = rows * D * (1 << r)
    if len(lines) - 1 != expected:
        raise FileFormatError(f"{filepath}: expected {expected} entries, found {len(lines) - 1}")
    entries = _numbers_to_array([_parse_number(tok) for tok in lines[1:]])
    return Sketch(n=n, r=r, D=D, with_tensor=bool(flag),
                  entries=entries.reshape(rows, D, 1 << r))


# =============================================================================
# CONDENSER DESCRIPTORS
# =============================================================================

def save_condenser(cond: LinearCondenser, filepath: PathLike):
    """
    Line 1 ``backend n r D``, then backend parameters: one line of hex rows per
    seed matrix (certified), ``kappa eps`` (lhl), or GUV sizes and the hex
    coefficients of g (guv).
    """
    lines = [f"{cond.backend} {cond.n} {cond.r} {cond.D}"]
    if isinstance(cond, CertifiedRandomCondenser):
        lines += [" ".join(f"{row:x}" for row in M.rows) for M in cond.matrices]
    elif isinstance(cond, LeftoverHashCondenser):
        if cond.kappa is None:
            lines.append("none none")
        else:
            lines.append(f"{cond.kappa} {cond.eps!r}")
    elif isinstance(cond, GuvCondenser):
        p = cond.params
        lines.append(f"{p.alpha!r} {p.kappa} {p.eps!r} {p.u} {p.ell} {p.q} {p.d}")
        lines.append(" ".join(f"{c:x}" for c in p.g.coeffs))
    else:
        raise ValueError(f"no descriptor format for {type(cond).__name__}")
    Path(filepath).parent.mkdir(parents=True, exist_ok=True)
    Path(filepath).write_text("\n".join(lines) + "\n")


def load_condenser(filepath: PathLike) -> LinearCondenser:
    lines = _read_lines(filepath)
    try:
        backend, n, r, D = lines[0].split()
        n, r, D = int(n), int(r), int(D)
        if backend == "certified":
            body = lines[1:]
            if len(body) < D or any(body[D:]):
                raise FileFormatError(f"{filepath}: expected {D} matrix lines")
            matrices = [F2Matrix(r, n, tuple(int(tok, 16) for tok in line.split()))
                        for line in body[:D]]
            return CertifiedRandomCondenser(n, r, matrices)
        if backend == "lhl":
            kappa, eps = lines[1].split()
            if kappa == "none":
                return LeftoverHashCondenser(n, r)
            return LeftoverHashCondenser(n, r, int(kappa), float(eps))
        if backend == "guv":
            alpha, kappa, eps, u, ell, q, d = lines[1].split()
            g = Poly(int(d), tuple(int(tok, 16) for tok in lines[2].split()))
            params = GuvParams(alpha=float(alpha), n=n, kappa=int(kappa), eps=float(eps),
                               u=int(u), ell=int(ell), q=int(q), d=int(d),
                               r_bits=int(ell) * int(d), g=g)
            return GuvCondenser(params)
    except (ValueError, IndexError) as exc:
        raise FileFormatError(f"{filepath}: malformed {lines[0] if lines else 'empty'} descriptor") from exc
    raise FileFormatError(f"{filepath}: unknown backend {backend!r}")
