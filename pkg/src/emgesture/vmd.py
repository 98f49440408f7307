"""Variational mode decomposition.

Splits a real 1-D signal into K band-limited modes by alternating, in the
frequency domain over the positive half-spectrum,

* a Wiener-filter update of each mode against the residual of the others,
* a spectral-centroid update of that mode's center frequency,
* dual ascent on a Lagrange multiplier enforcing sum(modes) == signal,

until the relative change of the mode spectra falls below ``tol``.

Frequencies are in cycles per sample of the input axis, in [0, 0.5]. When the
input is itself a spectrum (the denoising use case) these are cycles per bin.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import spectrum


class VmdError(ValueError):
    pass


class VmdConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class VmdConfig:
    k_modes: int = 4
    alpha: float = 2000.0
    tau: float = 0.1
    tol: float = 1e-7
    max_iter: int = 500
    init: Literal["zero", "uniform_spread", "random"] = "uniform_spread"
    seed: int = 0
    mirror: bool = True

    def __post_init__(self):
        if self.k_modes < 1:
            raise VmdError("k_modes must be >= 1")
        if not self.alpha > 0:
            raise VmdError("alpha must be positive")
        if not self.tol > 0:
            raise VmdError("tol must be positive")
        if self.tau < 0:
            raise VmdError("tau must be non-negative")
        if self.max_iter < 1:
            raise VmdError("max_iter must be >= 1")
        if self.init not in ("zero", "uniform_spread", "random"):
            raise VmdError(f"unknown init {self.init!r}")

    def same_parameters(self, other: "VmdConfig") -> bool:
        return (self.k_modes, self.alpha, self.tol) == (other.k_modes, other.alpha, other.tol)


@dataclass(frozen=True, eq=False)
class ModeSet:
    modes: np.ndarray           # (K, N), real
    center_freqs: np.ndarray    # (K,), cycles/sample
    n_iterations: int
    final_residual: float
    converged: bool = True
    config: VmdConfig = field(default_factory=VmdConfig)
    # per iteration: (omega_1..omega_K, update residual, reconstruction residual)
    history: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.modes.shape[0]


def initial_center_freqs(cfg: VmdConfig) -> np.ndarray:
    k = cfg.k_modes
    if cfg.init == "zero":
        return np.zeros(k)
    if cfg.init == "uniform_spread":
        return (np.arange(k) + 0.5) * 0.5 / k
    rng = np.random.default_rng(cfg.seed)
    return np.sort(rng.uniform(0.0, 0.5, size=k))


def _mirror(f: np.ndarray) -> tuple[np.ndarray, int]:
    half = f.size // 2
    return np.concatenate([f[:half][::-1], f, f[f.size - half:][::-1]]), half


def vmd_decompose(signal, cfg: VmdConfig | None = None, record_history: bool = False) -> ModeSet:
    cfg = cfg or VmdConfig()
    f = np.asarray(signal, dtype=float)
    if f.ndim != 1:
        raise VmdError("signal must be one-dimensional")
    if not np.all(np.isfinite(f)):
        raise VmdError("signal contains non-finite values")
    if f.size < 2 * cfg.k_modes:
        raise VmdError(f"signal of length {f.size} too short for K={cfg.k_modes}")

    if cfg.mirror:
        fm, offset = _mirror(f)
    else:
        fm, offset = f, 0
    T = fm.size
    n_pos = T // 2 + 1
    freqs = np.arange(n_pos) / T
    f_hat = spectrum.transform(fm)[:n_pos]

    K = cfg.k_modes
    u_hat = np.zeros((K, n_pos), dtype=np.complex128)
    omega = initial_center_freqs(cfg)
    lam = np.zeros(n_pos, dtype=np.complex128)
    two_alpha = 2.0 * cfg.alpha
    f_norm = np.sqrt(np.sum(np.abs(f_hat) ** 2))
    history = [] if record_history else None

    sum_u = np.zeros(n_pos, dtype=np.complex128)
    n_iter = 0
    u_diff = np.inf
    while n_iter < cfg.max_iter:
        n_iter += 1
        u_diff = 0.0
        for k in range(K):
            old = u_hat[k].copy()
            # residual of the other modes; modes i<k already hold this iteration's values
            others = sum_u - old
            new = (f_hat - others + lam / 2) / (1.0 + two_alpha * (freqs - omega[k]) ** 2)
            u_hat[k] = new
            sum_u = others + new
            power = new.real ** 2 + new.imag ** 2
            total = power.sum()
            if total > 0:
                omega[k] = np.dot(freqs, power) / total
            old_norm = np.sum(old.real ** 2 + old.imag ** 2)
            diff = np.sum(np.abs(new - old) ** 2)
            if old_norm > 0:
                u_diff += diff / old_norm
            elif diff > 0:
                u_diff = np.inf
        lam = lam + cfg.tau * (f_hat - sum_u)
        if record_history:
            recon = np.sqrt(np.sum(np.abs(f_hat - sum_u) ** 2)) / f_norm if f_norm > 0 else 0.0
            history.append(np.concatenate([omega, [u_diff, recon]]))
        if u_diff < cfg.tol:
            break

    converged = bool(u_diff < cfg.tol)
    if not converged:
        warnings.warn(
            f"VMD did not converge in {cfg.max_iter} iterations (residual {u_diff:.3g})",
            VmdConvergenceWarning,
            stacklevel=2,
        )

    modes = _to_time_domain(u_hat, T)[:, offset:offset + f.size]
    order = np.argsort(omega, kind="stable")
    return ModeSet(
        modes=modes[order],
        center_freqs=omega[order].copy(),
        n_iterations=n_iter,
        final_residual=float(u_diff),
        converged=converged,
        config=cfg,
        history=np.array(history) if record_history else None,
    )


def _to_time_domain(u_hat_pos: np.ndarray, T: int) -> np.ndarray:
    """Rebuild Hermitian full spectra from positive halves and invert to real modes."""
    K, n_pos = u_hat_pos.shape
    full = np.zeros((K, T), dtype=np.complex128)
    full[:, :n_pos] = u_hat_pos
    full[:, 0] = u_hat_pos[:, 0].real
    if T % 2 == 0:
        full[:, T // 2] = u_hat_pos[:, T // 2].real
        full[:, T // 2 + 1:] = np.conj(u_hat_pos[:, 1:T // 2][:, ::-1])
    else:
        full[:, n_pos:] = np.conj(u_hat_pos[:, 1:][:, ::-1])
    return spectrum.inverse_transform(full).real


def reconstruct(ms: ModeSet) -> np.ndarray:
    if ms.modes.size == 0:
        raise VmdError("empty ModeSet")
    return ms.modes.sum(axis=0)


def write_history_csv(path, ms: ModeSet) -> None:
    """Per-iteration diagnostic: iteration, omega_1..omega_K, residual, recon_error."""
    if ms.history is None:
        raise VmdError("ModeSet was decomposed without record_history=True")
    K = ms.k
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration"] + [f"omega_{i + 1}" for i in range(K)] + ["residual", "recon_error"])
        for i, row in enumerate(ms.history, start=1):
            w.writerow([i] + [repr(float(v)) for v in row])
