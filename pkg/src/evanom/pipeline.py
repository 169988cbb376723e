"""End-to-end anomaly scoring and evaluation.

A trained memory-surface net plus generator score a stream window by
window: encode the B input bins, predict the next frame with zero noise,
and take the MSE against the observed normalized frame. Frames are then
ranked by score; evaluation is threshold-free (ROC AUC and best F1).
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from . import gan as gan_mod
from .events import EventStream
from .msnet import MsNetParams
from .representation import sliding_windows
from .simulate import LabelTrack


class SingleClass(ValueError):
    pass


class EmptySeries(ValueError):
    pass


@dataclass
class PipelineConfig:
    """Flat key=value configuration shared by training and scoring."""

    bins: int = 8
    bin_dt_us: int = 25_000
    mode: str = "bilinear"
    cap: float = 5.0
    stride: int = 2
    ms_filters: int = 32
    ms_epochs: int = 50
    ms_lr: float = 1e-3
    ms_lambda_sparse: float = 1e-3
    ms_batch: int = 16
    gan_ngf: int = 16
    gan_ndf: int = 16
    gan_epochs: int = 10
    gan_lr: float = 2e-4
    gan_beta1: float = 0.5
    gan_batch: int = 16
    gan_lambda_l1: float = 0.0
    noise_samples: int = 0  # 0 = deterministic zero-noise scoring

    def ms_hyper(self):
        from .msnet import MsHyper
        return MsHyper(filters=self.ms_filters, epochs=self.ms_epochs,
                       lr=self.ms_lr, lambda_sparse=self.ms_lambda_sparse,
                       batch=self.ms_batch)

    def gan_hyper(self):
        return gan_mod.GanHyper(ngf=self.gan_ngf, ndf=self.gan_ndf,
                                epochs=self.gan_epochs, lr=self.gan_lr,
                                beta1=self.gan_beta1, batch=self.gan_batch,
                                lambda_l1=self.gan_lambda_l1, cap=self.cap)

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n"
                       for f in fields(self))

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        types = {f.name: f.type for f in fields(cls)}
        casts = {"int": int, "float": float, "str": str}
        kw = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            kw[key] = casts[types[key]](val.strip())
        return cls(**kw)


@dataclass
class ScoreSeries:
    t0: int              # start of the first scored frame, microseconds
    frame_dt: int        # spacing between scored frames, microseconds
    scores: np.ndarray   # per-frame MSE
    labels: np.ndarray | None = None  # per-frame {0,1}

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if not np.all(np.isfinite(self.scores)) or (self.scores < 0).any():
            raise ValueError("scores must be finite and non-negative")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int8)
            if len(self.labels) != len(self.scores):
                raise ValueError("labels length mismatch")

    def __len__(self):
        return len(self.scores)

    def frame_start(self, i: int) -> int:
        return self.t0 + i * self.frame_dt


@dataclass
class EvalMetrics:
    auc: float
    best_f1: float
    threshold: float
    curve: list  # (threshold, fpr, tpr, f1) per distinct score


def score_sequence(ms_params: MsNetParams, gan_params: gan_mod.GanParams,
                   stream: EventStream, cfg: PipelineConfig,
                   track: LabelTrack | None = None,
                   seed: int = 0) -> ScoreSeries:
    """Per-window prediction MSE over a stream, deterministic by default.

    With cfg.noise_samples == 0 the generator runs with an all-zero noise
    grid; with k > 0 the score is the mean over k seeded noise draws.
    """
    windows = sliding_windows(stream, cfg.bin_dt_us, cfg.bins,
                              stride=cfg.stride, mode=cfg.mode,
                              t0=0, duration=int(stream.t[-1]) if len(stream) else 0)
    surfaces, targets = gan_mod.prepare_batches(windows, ms_params, cfg.cap)
    n, _, h, w = surfaces.shape
    if cfg.noise_samples == 0:
        zs = [np.zeros((n, 1, h, w), dtype=np.float32)]
    else:
        rng = np.random.default_rng(seed)
        zs = [rng.standard_normal((n, 1, h, w)).astype(np.float32)
              for _ in range(cfg.noise_samples)]
    scores = np.zeros(n, dtype=np.float64)
    for z in zs:
        for start in range(0, n, 32):
            sl = slice(start, min(start + 32, n))
            pred = gan_mod.g_forward(gan_params, surfaces[sl], z[sl])
            d = pred - targets[sl]
            scores[sl] += d.reshape(d.shape[0], -1).__pow__(2).mean(axis=1)
    scores /= len(zs)
    t0 = windows[0].t0 + cfg.bins * cfg.bin_dt_us
    frame_dt = cfg.stride * cfg.bin_dt_us
    labels = None
    if track is not None:
        labels = np.array(
            [1 if track.overlaps_anomaly(t0 + k * frame_dt,
                                         t0 + k * frame_dt + cfg.bin_dt_us)
             else 0 for k in range(n)], dtype=np.int8)
    return ScoreSeries(t0, frame_dt, scores, labels)


def evaluate(series: ScoreSeries) -> EvalMetrics:
    """ROC over every distinct score threshold (anomaly = score >= t),
    trapezoidal AUC, and the best F1 along the sweep."""
    if series.labels is None:
        raise SingleClass("series has no labels")
    y = series.labels.astype(bool)
    pos = int(y.sum())
    neg = len(y) - pos
    if pos == 0 or neg == 0:
        raise SingleClass("need both classes to evaluate")
    order = np.argsort(-series.scores, kind="stable")
    sorted_scores = series.scores[order]
    sorted_y = y[order]
    # cumulative counts at each distinct-score cut
    distinct = np.nonzero(np.diff(sorted_scores))[0]
    cuts = np.append(distinct, len(sorted_scores) - 1)
    tp = np.cumsum(sorted_y)[cuts].astype(np.float64)
    fp = np.cumsum(~sorted_y)[cuts].astype(np.float64)
    tpr = np.concatenate([[0.0], tp / pos])
    fpr = np.concatenate([[0.0], fp / neg])
    auc = float(np.trapezoid(tpr, fpr))
    curve = []
    best_f1, best_thr = 0.0, float(sorted_scores[0])
    for i, cut in enumerate(cuts):
        thr = float(sorted_scores[cut])
        prec = tp[i] / (tp[i] + fp[i])
        rec = tp[i] / pos
        f1 = 0.0 if prec + rec == 0 else 2 * prec * rec / (prec + rec)
        curve.append((thr, fpr[i + 1], tpr[i + 1], f1))
        if f1 > best_f1:
            best_f1, best_thr = f1, thr
    return EvalMetrics(auc=auc, best_f1=best_f1, threshold=best_thr,
                       curve=curve)


def write_score_csv(series: ScoreSeries) -> str:
    rows = ["frame,t0_us,mse,label"]
    for i, s in enumerate(series.scores):
        lab = "" if series.labels is None else str(int(series.labels[i]))
        rows.append(f"{i},{series.frame_start(i)},{float(s)!r},{lab}")
    return "\n".join(rows) + "\n"


def read_score_csv(text: str) -> ScoreSeries:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "frame,t0_us,mse,label":
        raise ValueError("missing score CSV header")
    t0s, scores, labels = [], [], []
    for ln in lines[1:]:
        _, t0, mse, lab = ln.split(",")
        t0s.append(int(t0))
        scores.append(float(mse))
        labels.append(int(lab) if lab else None)
    frame_dt = t0s[1] - t0s[0] if len(t0s) > 1 else 1
    labs = None if any(l is None for l in labels) else np.array(labels)
    return ScoreSeries(t0s[0], frame_dt, np.array(scores), labs)


def plot_scores(series: ScoreSeries) -> str:
    """Self-contained static SVG: MSE per frame, anomaly frames shaded.

    Byte-deterministic for identical series; y axis spans [0, max*1.05].
    """
    if len(series) == 0:
        raise EmptySeries("nothing to plot")
    width, height = 800, 300
    ml, mr, mt, mb = 50, 10, 10, 30
    pw, ph = width - ml - mr, height - mt - mb
    n = len(series)
    ymax = float(series.scores.max()) * 1.05
    if ymax == 0:
        ymax = 1.0

    def sx(i):
        return ml + (pw * i / max(n - 1, 1))

    def sy(v):
        return mt + ph * (1.0 - v / ymax)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if series.labels is not None:
        i = 0
        while i < n:
            if series.labels[i]:
                j = i
                while j < n and series.labels[j]:
                    j += 1
                x0, x1 = sx(i), sx(j - 1)
                parts.append(
                    f'<rect x="{x0:.2f}" y="{mt}" width="{x1 - x0:.2f}" '
                    f'height="{ph}" fill="#fdd" stroke="none"/>')
                i = j
            else:
                i += 1
    pts = " ".join(f"{sx(i):.2f},{sy(v):.2f}"
                   for i, v in enumerate(series.scores))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" '
                 f'stroke-width="1.5"/>')
    parts.append(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" '
                 f'y2="{mt + ph}" stroke="black"/>')
    parts.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" '
                 f'stroke="black"/>')
    parts.append(f'<text x="{ml}" y="{height - 8}" font-size="12">frame</text>')
    parts.append(f'<text x="4" y="{mt + 12}" font-size="12">'
                 f'{ymax:.4g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_label_csv(track: LabelTrack) -> str:
    rows = ["t0_us,t1_us,label"]
    rows += [f"{a},{b},{lab}" for a, b, lab in track.intervals]
    return "\n".join(rows) + "\n"


def read_label_csv(text: str) -> LabelTrack:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "t0_us,t1_us,label":
        raise ValueError("missing label CSV header")
    intervals = []
    for ln in lines[1:]:
        a, b, lab = ln.split(",")
        intervals.append((int(a), int(b), lab))
    return LabelTrack(tuple(intervals))
