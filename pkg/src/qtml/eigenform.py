"""Hecke eigenvalues of the level-one eigenforms of weights 12, 16, 18, 20, 22, 26.

The weight-k eigenform is Delta * E_{k-12}.  Coefficients are computed exactly:

* ``crt`` route: residues modulo several 31-bit primes, power series products by
  Kronecker substitution (one GMP multiplication per product), Garner CRT.
* ``bigint`` route: exact Python integers with sparse-into-dense convolution by the
  pentagonal series; quadratic cost, used to certify the ``crt`` route at small N.

Both routes feed the same checksum, a polynomial hash of the exact coefficients
modulo a fixed 62-bit prime.
"""
from __future__ import annotations

import hashlib
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import gmpy2
import numpy as np

from . import arith

SUPPORTED_WEIGHTS = (12, 16, 18, 20, 22, 26)
EISENSTEIN_CONSTANT = {4: 240, 6: -504, 8: 480, 10: -264, 14: -24}  # -2k/B_k
# weight -> Eisenstein factors whose product is E_{k-12}
_EIS_FACTORS = {12: (), 16: (4,), 18: (6,), 20: (8,), 22: (10,), 26: (14,)}

CHECKSUM_PRIME = 4611686018427387847  # largest prime below 2**62
CHECKSUM_BASE = 1000003
CACHE_MAGIC = b"QTML"
CACHE_VERSION = 1
HEADER = struct.Struct("<4sIIQQ")
MEMORY_CAP_BYTES = 2 * 1024**3
CACHE_ENV = "QTML_CACHE_DIR"


class IntegrityError(RuntimeError):
    """A cached table does not match its recorded digest or header."""


class MemoryBudgetError(MemoryError):
    pass


@dataclass(frozen=True)
class ExactSeries:
    """Exact integer power series sum c_n q^n, n = 0 .. length-1."""

    coefficients: tuple[int, ...]
    scale: int = 1  # the series represents (1/scale) * coefficients

    @property
    def length(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, n: int) -> int:
        return self.coefficients[n]


def _check_budget(N: int, bits_per_coeff: int) -> None:
    need = N * bits_per_coeff // 8 * 4
    if need > MEMORY_CAP_BYTES:
        raise MemoryBudgetError(f"N={N} needs about {need / 2**30:.1f} GiB, cap is {MEMORY_CAP_BYTES / 2**30:.1f} GiB")


def _pentagonal_terms(N: int) -> list[tuple[int, int]]:
    """(index, sign) of prod_{n>=1}(1 - q^n) below q^N (Euler's pentagonal theorem)."""
    out = [(0, 1)]
    j = 1
    while True:
        sign = -1 if j % 2 else 1
        a, b = j * (3 * j - 1) // 2, j * (3 * j + 1) // 2
        if a >= N:
            break
        out.append((a, sign))
        if b < N:
            out.append((b, sign))
        j += 1
    return out


# -- exact big-integer route ------------------------------------------------


def _sparse_times_dense(sparse: list[tuple[int, int]], dense: list[int], N: int) -> list[int]:
    out = [0] * N
    for idx, sgn in sparse:
        if sgn == 1:
            for n in range(idx, N):
                out[n] += dense[n - idx]
        else:
            for n in range(idx, N):
                out[n] -= dense[n - idx]
    return out


def _dense_times_dense(a: list[int], b: list[int], N: int) -> list[int]:
    out = [0] * N
    for i, ai in enumerate(a[:N]):
        if ai:
            for j in range(N - i):
                out[i + j] += ai * b[j]
    return out


def delta_series(N: int) -> ExactSeries:
    """q prod (1 - q^n)^24 to order q^N, exact (sparse-into-dense, 24 passes)."""
    if N < 2:
        raise ValueError("delta_series needs N >= 2")
    _check_budget(N, 128)
    eta = _pentagonal_terms(N)
    series = [0] * N
    series[0] = 1
    for _ in range(24):
        series = _sparse_times_dense(eta, series, N)
    return ExactSeries(tuple([0] + series[: N - 1]))


def _sigma_table_exact(N: int, k: int) -> list[int]:
    sig = [0] * N
    for d in range(1, N):
        dk = d**k
        for m in range(d, N, d):
            sig[m] += dk
    return sig


def eisenstein_series(k: int, N: int) -> ExactSeries:
    """E_k = 1 + c_k sum sigma_{k-1}(n) q^n with integral c_k (scale 1)."""
    if k not in EISENSTEIN_CONSTANT:
        raise ValueError(f"Eisenstein weight must be one of {sorted(EISENSTEIN_CONSTANT)}")
    if N < 1:
        raise ValueError("N must be positive")
    c = EISENSTEIN_CONSTANT[k]
    sig = _sigma_table_exact(N, k - 1)
    return ExactSeries(tuple([1] + [c * s for s in sig[1:]]))


def eigenform_coefficients_bigint(weight: int, N: int) -> list[int]:
    """Exact a(0..N) for the weight-``weight`` eigenform; quadratic cost."""
    _check_weight(weight)
    out = list(delta_series(N + 1).coefficients)
    for k in _EIS_FACTORS[weight]:
        out = _dense_times_dense(out, list(eisenstein_series(k, N + 1).coefficients), N + 1)
    return out


# -- modular route ----------------------------------------------------------


def _modular_primes(count: int) -> list[int]:
    primes = []
    p = 2**31 - 1
    while len(primes) < count:
        if arith.is_probable_prime(p):
            primes.append(p)
        p -= 2
    return primes


_SLOT = 16  # bytes per coefficient slot; residue products stay below 2**82


def _pack(arr: np.ndarray) -> "gmpy2.mpz":
    buf = np.zeros((arr.size, 2), dtype="<u8")
    buf[:, 0] = arr
    return gmpy2.mpz.from_bytes(buf.tobytes(), "little")


def _unpack_mod(value, N: int, p: int) -> np.ndarray:
    """Reduce the low N slots of a Kronecker-packed product modulo p."""
    nbytes = max(N * _SLOT, (value.bit_length() + 7) // 8)
    raw = value.to_bytes(nbytes, "little")[: N * _SLOT]
    words = np.frombuffer(raw, dtype="<u8").reshape(N, 2)
    lo = (words[:, 0] % np.uint64(p)).astype(np.int64)
    hi = (words[:, 1] % np.uint64(p)).astype(np.int64)
    shift = pow(2, 64, p)
    return (lo + hi * shift) % p


def _mulmod_series(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a * b) mod (q^N, p) for residue vectors of length N."""
    N = a.size
    prod = _pack(a) * _pack(b)
    return _unpack_mod(prod, N, p)


def _sigma_mod(N: int, k: int, p: int) -> np.ndarray:
    """sigma_k(n) mod p for n < N, by the multiplicative sieve."""
    spf = arith.spf_table(max(N - 1, 2))
    if N <= 2:
        return np.arange(N, dtype=np.int64) % 2
    idx = np.arange(2, N, dtype=np.int64)
    q = spf[idx]
    # split n = q^e * rest with q the smallest prime factor
    pe = q.copy()
    rest = idx // q
    while True:
        more = rest % q == 0
        if not more.any():
            break
        rest[more] //= q[more]
        pe[more] *= q[more]
    # sigma_k(q^e) = 1 + q^k + ... + q^{ek} mod p
    qk = np.ones_like(q)
    base = q % p
    e = k
    b = base.copy()
    while e:
        if e & 1:
            qk = qk * b % p
        b = b * b % p
        e >>= 1
    local = np.ones_like(q)
    term = np.ones_like(q)
    power = q.copy()
    while True:
        live = power <= pe
        if not live.any():
            break
        term = np.where(live, term * qk % p, term)
        local = np.where(live, (local + term) % p, local)
        power = np.where(live, power * q, power)
    # sigma(n) = local(q^e) * sigma(rest); rest has one distinct prime fewer, so after
    # j sweeps every n with at most j distinct primes is final (n < 2e8 has at most 8)
    val = np.zeros(N, dtype=np.int64)
    val[1] = 1
    for _ in range(9):
        val[idx] = local * val[rest] % p
    return val


def _eigenform_residues(weight: int, N: int, p: int) -> np.ndarray:
    """a(0..N-1) mod p."""
    eta = np.zeros(N, dtype=np.int64)
    for idx, sgn in _pentagonal_terms(N):
        eta[idx] = sgn % p
    e2 = _mulmod_series(eta, eta, p)
    e4 = _mulmod_series(e2, e2, p)
    e8 = _mulmod_series(e4, e4, p)
    e16 = _mulmod_series(e8, e8, p)
    e24 = _mulmod_series(e16, e8, p)
    delta = np.zeros(N, dtype=np.int64)
    delta[1:] = e24[: N - 1]
    out = delta
    for k in _EIS_FACTORS[weight]:
        eis = _sigma_mod(N, k - 1, p) * (EISENSTEIN_CONSTANT[k] % p) % p
        eis[0] = 1
        out = _mulmod_series(out, eis, p)
    return out


def _coefficient_bits(weight: int, N: int) -> int:
    # |a(n)| <= tau(n) n^{(k-1)/2} <= 2 n^{k/2}
    return int(math.ceil(1 + weight / 2 * math.log2(max(N, 2)))) + 2


def eigenform_coefficients_crt(weight: int, N: int) -> list[int]:
    """Exact a(0..N) by CRT over 31-bit primes."""
    _check_weight(weight)
    _check_budget(N + 1, 8 * _SLOT)
    bits = _coefficient_bits(weight, N)
    primes = _modular_primes(bits // 30 + 2)
    residues = [_eigenform_residues(weight, N + 1, p) for p in primes]
    return _garner(residues, primes)


def _garner(residues: list[np.ndarray], primes: list[int]) -> list[int]:
    """Symmetric-range CRT: mixed-radix digits in numpy, then one Python sum per entry."""
    k = len(primes)
    digits = [residues[0].copy()]
    for i in range(1, k):
        p = primes[i]
        x = residues[i].copy()
        for j in range(i):
            inv = pow(primes[j], -1, p)
            x = (x - digits[j]) % p * inv % p
        digits.append(x)
    M = math.prod(primes)
    half = M // 2
    radices = [math.prod(primes[:i]) for i in range(k)]
    cols = [d.tolist() for d in digits]
    out = []
    for row in zip(*cols):
        v = sum(d * r for d, r in zip(row, radices))
        out.append(v - M if v > half else v)
    return out


def coefficient_checksum(coeffs: list[int]) -> int:
    """Polynomial hash sum_{n>=1} a(n) B^{n-1} mod P of the exact coefficients."""
    P = CHECKSUM_PRIME
    acc = 0
    for a in reversed(coeffs[1:]):
        acc = (acc * CHECKSUM_BASE + a) % P
    return acc


# -- table -------------------------------------------------------------------


def _check_weight(weight: int) -> None:
    if weight not in SUPPORTED_WEIGHTS:
        raise ValueError(f"weight {weight} unsupported; supported weights: {list(SUPPORTED_WEIGHTS)}")


@dataclass(frozen=True, eq=False)
class EigenformTable:
    """lambda(n) = a(n)/n^{(k-1)/2} for 1 <= n <= N_max; ``lam[0]`` is unused (0)."""

    weight: int
    N_max: int
    lam: np.ndarray = field(repr=False)
    checksum: int

    def __post_init__(self):
        if self.lam.shape != (self.N_max + 1,):
            raise ValueError("lambda array has the wrong length")
        self.lam.setflags(write=False)

    def __getitem__(self, n):
        return self.lam[n]

    def primes(self, limit: int | None = None) -> np.ndarray:
        top = self.N_max if limit is None else min(limit, self.N_max)
        return arith.prime_sieve(max(top, 2))

    def require(self, n: int) -> None:
        if n > self.N_max:
            raise TableTooShort(n, self.N_max)


class TableTooShort(ValueError):
    def __init__(self, required: int, available: int):
        super().__init__(f"eigenform table too short: need N_max >= {required}, have {available}")
        self.required = required
        self.available = available


def table_from_coefficients(weight: int, coeffs: list[int]) -> EigenformTable:
    N = len(coeffs) - 1
    if coeffs[1] != 1:
        raise ArithmeticError("leading coefficient is not 1")
    n = np.arange(N + 1, dtype=float)
    a = np.array([float(c) for c in coeffs])
    lam = np.zeros(N + 1)
    lam[1:] = a[1:] / n[1:] ** ((weight - 1) / 2)
    return EigenformTable(weight, N, lam, coefficient_checksum(coeffs))


def eigenform_table(weight: int, N_max: int, strategy: str = "crt") -> EigenformTable:
    """Build the table from scratch (see :func:`load_or_build` for the cached path)."""
    _check_weight(weight)
    if N_max < 1:
        raise ValueError("N_max must be positive")
    N = max(N_max, 2)
    if strategy == "crt":
        coeffs = eigenform_coefficients_crt(weight, N)
    elif strategy == "bigint":
        coeffs = eigenform_coefficients_bigint(weight, N)
    else:
        raise ValueError("strategy must be 'crt' or 'bigint'")
    table = table_from_coefficients(weight, coeffs[: N_max + 1])
    return table


def hecke_extend(table: EigenformTable, p: int, r: int) -> float:
    """lambda(p^r) from lambda(p) by lambda(p^{j+1}) = lambda(p) lambda(p^j) - lambda(p^{j-1})."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    table.require(p)
    prev, cur = 0.0, 1.0
    lp = float(table.lam[p])
    for _ in range(r):
        prev, cur = cur, lp * cur - prev
    return cur


def default_N_max(X_max: float) -> int:
    return int(50 * X_max * math.ceil(math.log(8 * X_max)))


# -- persistence ---------------------------------------------------------------


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "qtml"


def cache_path(cache_dir: Path, weight: int, N_max: int) -> Path:
    return Path(cache_dir) / f"eigen_k{weight}_n{N_max}_v{CACHE_VERSION}.bin"


def save_table(table: EigenformTable, path: Path) -> None:
    """Write header + doubles via temp file and rename; a sha256 sidecar guards the bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = HEADER.pack(CACHE_MAGIC, CACHE_VERSION, table.weight, table.N_max, table.checksum)
    body += np.ascontiguousarray(table.lam[1:], dtype="<f8").tobytes()
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    tmp.write_bytes(body)
    digest = hashlib.sha256(body).hexdigest()
    dtmp = tmp.with_suffix(".sha256tmp")
    dtmp.write_text(digest + "\n")
    os.replace(tmp, path)
    os.replace(dtmp, path.with_suffix(path.suffix + ".sha256"))


def load_table(path: Path, weight: int | None = None, N_max: int | None = None) -> EigenformTable:
    path = Path(path)
    body = path.read_bytes()
    digest_file = path.with_suffix(path.suffix + ".sha256")
    if not digest_file.exists():
        raise IntegrityError(f"missing digest for {path}")
    if hashlib.sha256(body).hexdigest() != digest_file.read_text().strip():
        raise IntegrityError(f"checksum mismatch in {path}; delete it and rebuild")
    if len(body) < HEADER.size:
        raise IntegrityError("truncated cache header")
    magic, version, k, n, checksum = HEADER.unpack_from(body)
    if magic != CACHE_MAGIC or version != CACHE_VERSION:
        raise IntegrityError(f"{path} is not a version-{CACHE_VERSION} table")
    if len(body) != HEADER.size + 8 * n:
        raise IntegrityError("payload length disagrees with header")
    if (weight is not None and k != weight) or (N_max is not None and n != N_max):
        raise IntegrityError(f"{path} holds weight {k}, N_max {n}")
    lam = np.zeros(n + 1)
    lam[1:] = np.frombuffer(body, dtype="<f8", offset=HEADER.size)
    return EigenformTable(k, n, lam, checksum)


def expected_cache_bytes(N_max: int) -> int:
    return HEADER.size + 8 * N_max


def load_or_build(weight: int, N_max: int, cache_dir: Path | None = None) -> EigenformTable:
    """Load the cached table for (weight, N_max), building and saving it on a miss."""
    _check_weight(weight)
    cache_dir = default_cache_dir() if cache_dir is None else Path(cache_dir)
    path = cache_path(cache_dir, weight, N_max)
    if path.exists():
        return load_table(path, weight, N_max)
    table = eigenform_table(weight, N_max)
    save_table(table, path)
    return table
