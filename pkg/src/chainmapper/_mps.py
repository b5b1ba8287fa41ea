"""Minimal matrix-product-state engine for nearest-neighbor gate evolution.

State layout: one tensor B[left, phys, right] per site plus the Schmidt
vector of each bond, kept in the right-canonical convention.  Two-site
gates are applied with the inverse-free update (theta carries the left
Schmidt values only for the SVD; the new left tensor is rebuilt from the
bare two-site block), so small Schmidt values never get divided by.

Expectation values are always taken as full contractions against cached
boundary environments and divided by the exact squared norm, so they stay
unbiased even when truncation has nudged the state off canonical form.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError
from scipy.linalg import svd as _scipy_svd

from .errors import ParameterError


def _svd(theta):
    try:
        return np.linalg.svd(theta, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    try:
        return _scipy_svd(theta, full_matrices=False, lapack_driver="gesvd")
    except LinAlgError as exc:  # pragma: no cover - double LAPACK failure
        raise RuntimeError(f"SVD failed on a {theta.shape} block") from exc


class MPS:
    """Finite MPS with per-bond Schmidt vectors.

    ``Bs[i]`` has axes (left, phys, right); ``Ss[i]`` holds the Schmidt
    values on the left bond of site i, with ``Ss[0] = [1.0]`` at the open
    boundary.
    """

    def __init__(self, Bs, Ss):
        self.Bs = Bs
        self.Ss = Ss

    @classmethod
    def product_state(cls, local_states) -> "MPS":
        Bs = []
        for vec in local_states:
            v = np.asarray(vec, dtype=complex)
            n = np.linalg.norm(v)
            if n == 0:
                raise ParameterError("local state must be nonzero")
            Bs.append((v / n).reshape(1, v.size, 1))
        Ss = [np.ones(1) for _ in local_states] + [np.ones(1)]
        return cls(Bs, Ss)

    def __len__(self) -> int:
        return len(self.Bs)

    def bond_dimensions(self) -> list[int]:
        return [B.shape[2] for B in self.Bs[:-1]]

    # -- gate application ----------------------------------------------------

    def apply_two_site(self, U, i: int, chi_max: int, svd_cutoff: float):
        """Apply gate U (axes out1, out2, in1, in2) to sites i, i+1.

        Truncates to the smallest rank whose discarded squared Schmidt
        weight is below svd_cutoff, capped at chi_max, and rescales so the
        represented state keeps its pre-truncation norm.  Returns
        (discarded_weight, kept_rank).
        """
        B1, B2 = self.Bs[i], self.Bs[i + 1]
        a, d1, _ = B1.shape
        _, d2, c = B2.shape
        C = np.tensordot(B1, B2, axes=(2, 0))
        C = np.tensordot(U, C, axes=([2, 3], [1, 2])).transpose(2, 0, 1, 3)
        theta = (self.Ss[i][:, None, None, None] * C).reshape(a * d1, d2 * c)
        _, s, vh = _svd(theta)
        s2 = s * s
        total = s2.sum()
        tail = np.concatenate([np.cumsum(s2[::-1])[::-1][1:], [0.0]])
        candidates = np.flatnonzero(tail <= svd_cutoff * total) + 1
        k = int(candidates[0]) if candidates.size else s.size
        k = max(1, min(k, chi_max))
        discarded = float(s2[k:].sum() / total)
        kept = s[:k]
        scale = np.sqrt(total) / np.linalg.norm(kept)
        vh_k = vh[:k]
        self.Bs[i + 1] = vh_k.reshape(k, d2, c)
        self.Bs[i] = scale * np.tensordot(
            C.reshape(a, d1, d2 * c), vh_k.conj(), axes=(2, 1))
        self.Ss[i + 1] = kept / np.linalg.norm(kept)
        return discarded, k

    # -- contractions ----------------------------------------------------------

    def _transfer(self, left, i: int, op=None):
        """Absorb site i into the left environment, sandwiching ``op``."""
        B = self.Bs[i]
        X = np.tensordot(left, B, axes=(0, 0))  # (bra_left, phys, right)
        if op is not None:
            X = np.tensordot(op, X, axes=(1, 1)).transpose(1, 0, 2)
        return np.tensordot(X, B.conj(), axes=([0, 1], [0, 1]))

    def right_environments(self) -> list[np.ndarray]:
        """R[i] = contraction of sites i..end; R[0][0,0] is the squared norm."""
        L = len(self)
        R = [None] * (L + 1)
        R[L] = np.ones((1, 1), dtype=complex)
        for i in range(L - 1, -1, -1):
            B = self.Bs[i]
            X = np.tensordot(B, R[i + 1], axes=(2, 0))
            R[i] = np.tensordot(X, B.conj(), axes=([1, 2], [1, 2]))
        return R

    def norm(self) -> float:
        return float(np.sqrt(self.right_environments()[0][0, 0].real))

    def rescale(self, factor: float) -> None:
        self.Bs[0] = self.Bs[0] * factor

    def measure(self, one_site=None, pairs=None):
        """Expectation values from a single environment sweep.

        ``one_site``: {site: {name: operator}};
        ``pairs``: {bond: {name: (op_left, op_right)}} for neighboring sites.
        Returns ({site: {name: value}}, {bond: {name: value}}, norm_sq);
        values are already divided by the squared norm.
        """
        one_site = one_site or {}
        pairs = pairs or {}
        R = self.right_environments()
        norm_sq = R[0][0, 0].real
        left = np.ones((1, 1), dtype=complex)
        out_sites: dict = {}
        out_pairs: dict = {}
        for i in range(len(self)):
            for name, op in one_site.get(i, {}).items():
                G = self._transfer(left, i, op)
                val = np.tensordot(G, R[i + 1], axes=([0, 1], [0, 1]))
                out_sites.setdefault(i, {})[name] = complex(val) / norm_sq
            for name, (p, q) in pairs.get(i, {}).items():
                G = self._transfer(left, i, p)
                G = self._transfer(G, i + 1, q)
                val = np.tensordot(G, R[i + 2], axes=([0, 1], [0, 1]))
                out_pairs.setdefault(i, {})[name] = complex(val) / norm_sq
            left = self._transfer(left, i)
        return out_sites, out_pairs, float(norm_sq)

    def reduced_density(self, i: int) -> np.ndarray:
        """Reduced density matrix of site i, trace-normalized."""
        R = self.right_environments()
        norm_sq = R[0][0, 0].real
        left = np.ones((1, 1), dtype=complex)
        for j in range(i):
            left = self._transfer(left, j)
        B = self.Bs[i]
        X = np.tensordot(left, B, axes=(0, 0))        # (bra_l, s, r)
        Y = np.tensordot(X, R[i + 1], axes=(2, 0))    # (bra_l, s, bra_r)
        rho = np.tensordot(Y, B.conj(), axes=([0, 2], [0, 2]))  # (s, s')
        return rho / norm_sq
