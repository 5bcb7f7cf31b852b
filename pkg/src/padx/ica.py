"""Co-occurrence feature aggregation over scored proposals.

Ambiguous objects are hard to classify from their own appearance, but the
other confident proposals in the same scene carry usable context. The
aggregator selects the top-k proposals by confidence, concatenates their
feature vectors, compresses them into a shared fusion vector through one
ReLU layer, re-injects that vector into every selected proposal through a
second ReLU layer, and emits fresh classification logits:

    F_concat = [f_sel(1); ...; f_sel(k)]          (zero-padded when N < k)
    F_fusion = relu(W1 @ F_concat + b1)
    f_new_j  = relu(W2 @ [f_j; F_fusion] + b2)    for each selected j
    logits_j = head_W @ f_new_j + head_b

Non-selected proposals pass through untouched. Everything is float64 and the
backward pass is exact reverse-mode (ReLU subgradient 0 at 0), verified
against central finite differences by ``grad_check``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_K = 4
LEARNING_RATE = 0.05
DEFAULT_STEPS = 2000

_MAGIC = b"ICA1"


@dataclass(frozen=True)
class ProposalSet:
    """N proposal feature vectors (N, d) with confidence scores in [0, 1]."""

    features: np.ndarray
    scores: np.ndarray

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=np.float64)
        scores = np.asarray(self.scores, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise ValueError(f"features must be (N >= 1, d), got shape {feats.shape}")
        if scores.shape != (feats.shape[0],):
            raise ValueError(
                f"scores shape {scores.shape} does not match N={feats.shape[0]}"
            )
        if np.any(scores < 0) or np.any(scores > 1):
            raise ValueError("scores must lie in [0, 1]")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "scores", scores)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass
class IcaParams:
    """Fusion and head weights; shapes fixed by (k, d, m, C)."""

    W1: np.ndarray      # (m, k*d)
    b1: np.ndarray      # (m,)
    W2: np.ndarray      # (d, d+m)
    b2: np.ndarray      # (d,)
    head_W: np.ndarray  # (C, d)
    head_b: np.ndarray  # (C,)
    k: int
    d: int
    m: int
    C: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        expected = {
            "W1": (self.m, self.k * self.d),
            "b1": (self.m,),
            "W2": (self.d, self.d + self.m),
            "b2": (self.d,),
            "head_W": (self.C, self.d),
            "head_b": (self.C,),
        }
        for name, shape in expected.items():
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            setattr(self, name, arr)

    @classmethod
    def initialize(cls, k: int, d: int, C: int, m: int | None = None,
                   seed: int = 0) -> "IcaParams":
        """He-normal weights (std sqrt(2 / fan_in)), zero biases."""
        m = d if m is None else m
        rng = np.random.default_rng(seed)
        def he(rows, cols):
            return rng.normal(0.0, np.sqrt(2.0 / cols), size=(rows, cols))
        return cls(
            W1=he(m, k * d), b1=np.zeros(m),
            W2=he(d, d + m), b2=np.zeros(d),
            head_W=he(C, d), head_b=np.zeros(C),
            k=k, d=d, m=m, C=C,
        )

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2,
                "head_W": self.head_W, "head_b": self.head_b}


@dataclass
class IcaGrads:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    head_W: np.ndarray
    head_b: np.ndarray

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2,
                "head_W": self.head_W, "head_b": self.head_b}


@dataclass(frozen=True)
class IcaOutput:
    selected: np.ndarray       # indices into the proposal set, score order
    fusion: np.ndarray         # (m,)
    new_features: np.ndarray   # (n_sel, d)
    logits: np.ndarray         # (n_sel, C)


def topk_select(ps: ProposalSet, k: int) -> np.ndarray:
    """Indices of the k highest scores, ties to the lower index.

    Returns all N indices (score-ordered) when N < k; padding is the
    caller's concern.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    order = np.argsort(-ps.scores, kind="stable")
    return order[:min(k, ps.n)]


@dataclass(frozen=True)
class _ForwardTrace:
    selected: np.ndarray
    concat: np.ndarray     # (k*d,)
    z1: np.ndarray         # (m,)
    fusion: np.ndarray     # (m,)
    aug: np.ndarray        # (n_sel, d+m)
    z2: np.ndarray         # (n_sel, d)
    new_features: np.ndarray
    logits: np.ndarray


def _forward_trace(params: IcaParams, ps: ProposalSet) -> _ForwardTrace:
    if ps.dim != params.d:
        raise ValueError(f"proposal dim {ps.dim} does not match params d={params.d}")
    selected = topk_select(ps, params.k)
    n_sel = selected.size
    concat = np.zeros(params.k * params.d)
    concat[:n_sel * params.d] = ps.features[selected].reshape(-1)
    z1 = params.W1 @ concat + params.b1
    fusion = np.maximum(z1, 0.0)
    aug = np.concatenate(
        [ps.features[selected], np.broadcast_to(fusion, (n_sel, params.m))], axis=1
    )
    z2 = aug @ params.W2.T + params.b2
    new_features = np.maximum(z2, 0.0)
    logits = new_features @ params.head_W.T + params.head_b
    return _ForwardTrace(selected, concat, z1, fusion, aug, z2, new_features, logits)


def ica_forward(params: IcaParams, ps: ProposalSet) -> IcaOutput:
    """Refine the top-k proposals; others pass through unmodified."""
    t = _forward_trace(params, ps)
    return IcaOutput(selected=t.selected, fusion=t.fusion,
                     new_features=t.new_features, logits=t.logits)


def ica_backward(params: IcaParams, ps: ProposalSet,
                 upstream: np.ndarray) -> tuple[IcaGrads, np.ndarray]:
    """Exact gradients of the forward pass.

    ``upstream`` is dLoss/dlogits with shape (n_sel, C). Returns parameter
    gradients and dLoss/dfeatures for the whole proposal set (zero rows for
    non-selected proposals). The fusion vector fans out into every selected
    branch, so its gradient sums over all of them.
    """
    t = _forward_trace(params, ps)
    n_sel = t.selected.size
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != t.logits.shape:
        raise ValueError(
            f"upstream shape {upstream.shape} does not match logits {t.logits.shape}"
        )

    d_head_W = upstream.T @ t.new_features
    d_head_b = upstream.sum(axis=0)
    d_new = upstream @ params.head_W                     # (n_sel, d)
    d_z2 = d_new * (t.z2 > 0.0)
    d_W2 = d_z2.T @ t.aug
    d_b2 = d_z2.sum(axis=0)
    d_aug = d_z2 @ params.W2                             # (n_sel, d+m)
    d_fusion = d_aug[:, params.d:].sum(axis=0)           # shared fan-out
    d_z1 = d_fusion * (t.z1 > 0.0)
    d_W1 = np.outer(d_z1, t.concat)
    d_b1 = d_z1
    d_concat = params.W1.T @ d_z1                        # (k*d,)

    d_features = np.zeros_like(ps.features)
    d_features[t.selected] += d_aug[:, :params.d]
    d_features[t.selected] += d_concat[:n_sel * params.d].reshape(n_sel, params.d)

    grads = IcaGrads(W1=d_W1, b1=d_b1, W2=d_W2, b2=d_b2,
                     head_W=d_head_W, head_b=d_head_b)
    return grads, d_features


def grad_check(params: IcaParams, ps: ProposalSet, eps: float = 1e-5) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Loss is the sum of squared logits. Callers must supply points whose
    pre-activations sit further than ~10*eps from zero, or the finite
    difference straddles a ReLU kink (see ``gradcheck_case``).
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")

    def loss_at(p: IcaParams, feats: np.ndarray) -> float:
        t = _forward_trace(p, ProposalSet(feats, ps.scores))
        return float((t.logits ** 2).sum())

    trace = _forward_trace(params, ps)
    grads, d_features = ica_backward(params, ps, 2.0 * trace.logits)

    worst = 0.0

    def compare(analytic: float, numeric: float) -> None:
        nonlocal worst
        rel = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
        worst = max(worst, rel)

    for name, arr in params.arrays().items():
        grad = grads.arrays()[name]
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + eps
            hi = loss_at(params, ps.features)
            arr[idx] = orig - eps
            lo = loss_at(params, ps.features)
            arr[idx] = orig
            compare(grad[idx], (hi - lo) / (2.0 * eps))

    feats = ps.features.copy()
    for idx in np.ndindex(feats.shape):
        orig = feats[idx]
        feats[idx] = orig + eps
        hi = loss_at(params, feats)
        feats[idx] = orig - eps
        lo = loss_at(params, feats)
        feats[idx] = orig
        compare(d_features[idx], (hi - lo) / (2.0 * eps))

    return worst


def gradcheck_case(d: int, k: int, C: int, seed: int, m: int | None = None,
                   eps: float = 1e-5, n_proposals: int | None = None
                   ) -> tuple[IcaParams, ProposalSet]:
    """Seeded random instance whose pre-activations avoid ReLU kinks.

    Redraws until every |z1| and |z2| entry exceeds 10 * eps, so central
    differences with step eps never straddle a kink.
    """
    m = d if m is None else m
    n = k + 2 if n_proposals is None else n_proposals
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        params = IcaParams.initialize(k=k, d=d, C=C, m=m,
                                      seed=int(rng.integers(2 ** 63)))
        feats = rng.normal(0.0, 1.0, size=(n, d))
        scores = rng.uniform(0.0, 1.0, size=n)
        t = _forward_trace(params, ProposalSet(feats, scores))
        margin = min(np.abs(t.z1).min(), np.abs(t.z2).min())
        if margin > 10.0 * eps:
            return params, ProposalSet(feats, scores)
    raise RuntimeError("could not find a kink-free gradcheck instance")


def save_params(params: IcaParams, path: str | Path) -> None:
    """Flat binary: magic 'ICA1', u32 dims (k, d, m, C), f8 arrays, little-endian."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIII", params.k, params.d, params.m, params.C))
        for name in ("W1", "b1", "W2", "b2", "head_W", "head_b"):
            arr = np.ascontiguousarray(getattr(params, name), dtype="<f8")
            fh.write(arr.tobytes())


def load_params(path: str | Path) -> IcaParams:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise ValueError(f"not an ICA parameter file: bad magic {blob[:4]!r}")
    k, d, m, C = struct.unpack("<IIII", blob[4:20])
    shapes = [("W1", (m, k * d)), ("b1", (m,)), ("W2", (d, d + m)), ("b2", (d,)),
              ("head_W", (C, d)), ("head_b", (C,))]
    offset = 20
    arrays = {}
    for name, shape in shapes:
        size = int(np.prod(shape)) * 8
        if offset + size > len(blob):
            raise ValueError(f"truncated ICA parameter file while reading {name}")
        arrays[name] = np.frombuffer(
            blob, dtype="<f8", count=int(np.prod(shape)), offset=offset
        ).reshape(shape).astype(np.float64)
        offset += size
    if offset != len(blob):
        raise ValueError(f"trailing bytes in ICA parameter file ({len(blob) - offset})")
    return IcaParams(k=k, d=d, m=m, C=C, **arrays)
