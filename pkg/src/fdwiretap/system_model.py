"""Interference-plus-noise covariances and secrecy rate evaluation.

The residual self-interference model couples subcarriers: the transmit and
receive distortion terms sum the jamming covariances over the whole band,
so a jamming choice on one subcarrier raises the interference floor on all
of them.  Rates are reported in bits/s/Hz (base-2 logs); the optimizer
works in nats internally.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .channel import ChannelRealization, SystemParams
from .errors import DimensionMismatch

LN2 = float(np.log(2.0))


@dataclass(eq=False)
class TransmitDesign:
    """Per-subcarrier information (X) and jamming (W) covariances.

    X has shape (N, M_a, M_a), W has shape (N, M_bt, M_bt).
    """

    X: np.ndarray
    W: np.ndarray

    @classmethod
    def zeros(cls, params: SystemParams) -> "TransmitDesign":
        return cls(X=np.zeros((params.N, params.M_a, params.M_a), complex),
                   W=np.zeros((params.N, params.M_bt, params.M_bt), complex))

    def copy(self) -> "TransmitDesign":
        return TransmitDesign(X=self.X.copy(), W=self.W.copy())

    def validate(self, params: SystemParams, psd_tol: float = 1e-9,
                 budget_tol: float = 1e-6) -> None:
        if self.X.shape != (params.N, params.M_a, params.M_a):
            raise DimensionMismatch("X has wrong shape")
        if self.W.shape != (params.N, params.M_bt, params.M_bt):
            raise DimensionMismatch("W has wrong shape")
        for stack in (self.X, self.W):
            for m in stack:
                if linalg.min_eigenvalue(m) < -psd_tol:
                    raise ValueError("covariance is not PSD within tolerance")
        if sum(linalg.real_trace(m) for m in self.X) > params.X_max + budget_tol:
            raise ValueError("information power budget violated")
        if sum(linalg.real_trace(m) for m in self.W) > params.W_max + budget_tol:
            raise ValueError("jamming power budget violated")


@dataclass(eq=False)
class BidirectionalDesign:
    """Information and jamming covariances for both FD nodes."""

    X_a: np.ndarray  # (N, M_at, M_at)
    W_a: np.ndarray  # (N, M_at, M_at)
    X_b: np.ndarray  # (N, M_bt, M_bt)
    W_b: np.ndarray  # (N, M_bt, M_bt)

    @classmethod
    def zeros(cls, params: SystemParams) -> "BidirectionalDesign":
        na, nb = params.M_at, params.M_bt
        z = lambda m: np.zeros((params.N, m, m), complex)
        return cls(X_a=z(na), W_a=z(na), X_b=z(nb), W_b=z(nb))

    def copy(self) -> "BidirectionalDesign":
        return BidirectionalDesign(self.X_a.copy(), self.W_a.copy(),
                                   self.X_b.copy(), self.W_b.copy())


@dataclass(eq=False)
class SecrecyReport:
    """Per-subcarrier and summed secrecy rates in bits/s/Hz.

    ``I_sec[n] = max(I_ab[n] - I_ae[n], 0)``; in the bidirectional case the
    reverse direction contributes a second clamped difference.
    """

    I_ab: np.ndarray
    I_ae: np.ndarray
    I_sec: np.ndarray
    I_sum: float
    I_ba: np.ndarray | None = field(default=None)
    I_be: np.ndarray | None = field(default=None)


def _check_jam_shape(params: SystemParams, W: np.ndarray) -> None:
    if W.shape != (params.N, params.M_bt, params.M_bt):
        raise DimensionMismatch("jamming covariance has wrong shape")


def sigma_bob(params: SystemParams, ch: ChannelRealization,
              design: TransmitDesign, n: int) -> np.ndarray:
    """Noise-plus-residual-interference covariance at Bob on subcarrier n.

    The distortion sums run over all subcarriers: both the transmit-chain
    term (through the SI channel of subcarrier n) and the receive-chain
    term accumulate the whole-band jamming.
    """
    _check_jam_shape(params, design.W)
    m = params.M_br
    out = params.noise["b"][n] * np.eye(m, dtype=complex)
    d_corr = params.D_corr["b"]
    if np.any(d_corr):
        out = out + linalg.real_trace(design.W[n]) * d_corr
    kappa = params.kappa["b"][n]
    if kappa > 0:
        diag_sum = np.sum(np.diagonal(design.W, axis1=1, axis2=2), axis=0)
        h = ch.link("bb", n)
        out = out + kappa * (h * np.real(diag_sum)) @ h.conj().T
    beta = params.beta["b"][n]
    if beta > 0:
        acc = np.zeros(m)
        for k in range(params.N):
            h = ch.link("bb", k)
            acc = acc + np.real(np.diagonal(h @ design.W[k] @ h.conj().T))
        out = out + beta * np.diag(acc)
    return linalg.hermitize(out)


def sigma_eve(params: SystemParams, ch: ChannelRealization,
              design: TransmitDesign, n: int) -> np.ndarray:
    """Noise-plus-interference covariance at Eve on subcarrier n."""
    _check_jam_shape(params, design.W)
    h = ch.link("be", n)
    out = params.noise["e"][n] * np.eye(params.M_e, dtype=complex)
    return linalg.hermitize(out + h @ design.W[n] @ h.conj().T)


def _rate_bits(h: np.ndarray, x: np.ndarray, noise_cov: np.ndarray) -> float:
    """log2 |I + H X H^H Sigma^-1|, evaluated as a log-det difference."""
    signal = h @ x @ h.conj().T
    return (linalg.logdet(linalg.hermitize(noise_cov + signal))
            - linalg.logdet(noise_cov)) / LN2


def secrecy_rates(params: SystemParams, ch: ChannelRealization,
                  design: TransmitDesign) -> SecrecyReport:
    """Per-subcarrier clamped secrecy rates and their sum, in bits/s/Hz."""
    n_sub = params.N
    i_ab = np.zeros(n_sub)
    i_ae = np.zeros(n_sub)
    for n in range(n_sub):
        sb = sigma_bob(params, ch, design, n)
        se = sigma_eve(params, ch, design, n)
        i_ab[n] = _rate_bits(ch.link("ab", n), design.X[n], sb)
        i_ae[n] = _rate_bits(ch.link("ae", n), design.X[n], se)
    i_sec = np.maximum(i_ab - i_ae, 0.0)
    return SecrecyReport(I_ab=i_ab, I_ae=i_ae, I_sec=i_sec,
                         I_sum=float(i_sec.sum()))


def unclamped_objective_nats(params: SystemParams, ch: ChannelRealization,
                             design: TransmitDesign) -> float:
    """Sum over subcarriers of the unclamped secrecy differences in nats.

    This is the quantity the block-coordinate optimizer maximizes; the
    reporting clamp is applied only in :func:`secrecy_rates`.
    """
    total = 0.0
    for n in range(params.N):
        sb = sigma_bob(params, ch, design, n)
        se = sigma_eve(params, ch, design, n)
        total += _rate_bits(ch.link("ab", n), design.X[n], sb)
        total -= _rate_bits(ch.link("ae", n), design.X[n], se)
    return total * LN2


def sigma_node_bidirectional(params: SystemParams, ch: ChannelRealization,
                             design: BidirectionalDesign, node: str,
                             n: int) -> np.ndarray:
    """Interference-plus-noise covariance at a FD node ('a' or 'b').

    Interference combines the partner's jamming (through the cross channel)
    with residual SI driven by the node's own total transmission X + W.
    """
    if node not in ("a", "b"):
        raise ValueError("node must be 'a' or 'b'")
    if node == "a":
        m, si_link, cross_link = params.M_ar, "aa", "ba"
        own = design.X_a + design.W_a
        partner_w = design.W_b
    else:
        m, si_link, cross_link = params.M_br, "bb", "ab"
        own = design.X_b + design.W_b
        partner_w = design.W_a
    out = params.noise[node][n] * np.eye(m, dtype=complex)
    h_cross = ch.link(cross_link, n)
    if h_cross.shape[0] != m:
        raise DimensionMismatch("cross channel has wrong row count")
    out = out + h_cross @ partner_w[n] @ h_cross.conj().T
    d_corr = params.D_corr[node]
    if np.any(d_corr):
        out = out + linalg.real_trace(own[n]) * d_corr
    kappa = params.kappa[node][n]
    if kappa > 0:
        diag_sum = np.sum(np.diagonal(own, axis1=1, axis2=2), axis=0)
        h = ch.link(si_link, n)
        out = out + kappa * (h * np.real(diag_sum)) @ h.conj().T
    beta = params.beta[node][n]
    if beta > 0:
        acc = np.zeros(m)
        for k in range(params.N):
            h = ch.link(si_link, k)
            acc = acc + np.real(np.diagonal(h @ own[k] @ h.conj().T))
        out = out + beta * np.diag(acc)
    return linalg.hermitize(out)


def sigma_eve_bidirectional(params: SystemParams, ch: ChannelRealization,
                            design: BidirectionalDesign, n: int) -> np.ndarray:
    """Covariance at Eve with both nodes jamming (worst case: information
    signals are treated as decodable by Eve and excluded)."""
    h_ae = ch.link("ae", n)
    h_be = ch.link("be", n)
    out = params.noise["e"][n] * np.eye(params.M_e, dtype=complex)
    out = out + h_ae @ design.W_a[n] @ h_ae.conj().T
    out = out + h_be @ design.W_b[n] @ h_be.conj().T
    return linalg.hermitize(out)


def secrecy_rates_bidirectional(params: SystemParams, ch: ChannelRealization,
                                design: BidirectionalDesign) -> SecrecyReport:
    """Clamped secrecy rates for both directions, in bits/s/Hz."""
    n_sub = params.N
    i_ab = np.zeros(n_sub)
    i_ae = np.zeros(n_sub)
    i_ba = np.zeros(n_sub)
    i_be = np.zeros(n_sub)
    for n in range(n_sub):
        sa = sigma_node_bidirectional(params, ch, design, "a", n)
        sb = sigma_node_bidirectional(params, ch, design, "b", n)
        se = sigma_eve_bidirectional(params, ch, design, n)
        i_ab[n] = _rate_bits(ch.link("ab", n), design.X_a[n], sb)
        i_ae[n] = _rate_bits(ch.link("ae", n), design.X_a[n], se)
        i_ba[n] = _rate_bits(ch.link("ba", n), design.X_b[n], sa)
        i_be[n] = _rate_bits(ch.link("be", n), design.X_b[n], se)
    i_sec = np.maximum(i_ab - i_ae, 0.0) + np.maximum(i_ba - i_be, 0.0)
    return SecrecyReport(I_ab=i_ab, I_ae=i_ae, I_sec=i_sec,
                         I_sum=float(i_sec.sum()), I_ba=i_ba, I_be=i_be)


def unclamped_objective_bidirectional_nats(params: SystemParams,
                                           ch: ChannelRealization,
                                           design: BidirectionalDesign) -> float:
    total = 0.0
    for n in range(params.N):
        sa = sigma_node_bidirectional(params, ch, design, "a", n)
        sb = sigma_node_bidirectional(params, ch, design, "b", n)
        se = sigma_eve_bidirectional(params, ch, design, n)
        total += _rate_bits(ch.link("ab", n), design.X_a[n], sb)
        total -= _rate_bits(ch.link("ae", n), design.X_a[n], se)
        total += _rate_bits(ch.link("ba", n), design.X_b[n], sa)
        total -= _rate_bits(ch.link("be", n), design.X_b[n], se)
    return total * LN2


def precoders_from_covariances(design: TransmitDesign, d: int) -> list[np.ndarray]:
    """Recover per-subcarrier precoders V with d streams from X = V V^H.

    Reporting utility: keeps the d strongest eigendirections of each
    covariance.
    """
    out = []
    for x in design.X:
        vals, vecs = np.linalg.eigh(linalg.hermitize(x))
        top = np.argsort(vals)[::-1][:d]
        out.append(vecs[:, top] * np.sqrt(np.maximum(vals[top], 0.0)))
    return out
