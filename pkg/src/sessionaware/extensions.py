"""Session-aware wrappers (extend, boost, remind) around any base recommender.

Naming follows the ``<base>_<flags>`` convention, e.g. ``vsknn_ebr`` is VSKNN
with all three extensions, applied in that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from sessionaware.algorithms.base import PredictionContext, ScoredList, tie_key
from sessionaware.errors import ConfigError
from sessionaware.preprocess import Session


@dataclass(frozen=True)
class ExtendConfig:
    desired_length: int

    def __post_init__(self) -> None:
        if self.desired_length < 1:
            raise ConfigError("extend desired_length must be >= 1")


@dataclass(frozen=True)
class BoostConfig:
    boost: float  # fraction: 0.2 raises scores by 20 %

    def __post_init__(self) -> None:
        if self.boost < 0:
            raise ConfigError("boost must be >= 0")


@dataclass(frozen=True)
class RemindConfig:
    num_past_sessions: int = 3
    weight_rel: int = 1
    weight_irec: int = 0
    weight_ssim: int = 0

    def __post_init__(self) -> None:
        if self.num_past_sessions < 1:
            raise ConfigError("remind num_past_sessions must be >= 1")
        if self.weight_rel < 1:
            raise ConfigError("weight_rel must be >= 1")
        if self.weight_irec < 0 or self.weight_ssim < 0:
            raise ConfigError("reminder weights must be >= 0")


def extend_session(ctx: PredictionContext, cfg: ExtendConfig) -> PredictionContext:
    """Prepends the user's most recent past events until the session reaches
    the desired length or the history runs out."""
    cur = ctx.current_session
    missing = cfg.desired_length - len(cur)
    if missing <= 0 or not ctx.user_history:
        return ctx
    items: list[int] = []
    stamps: list[int] = []
    for past in reversed(ctx.user_history):
        items[:0] = past.items
        stamps[:0] = past.timestamps
        if len(items) >= missing:
            break
    items, stamps = items[-missing:], stamps[-missing:]
    extended = Session(
        cur.session_id,
        cur.user_id,
        tuple(items) + cur.items,
        tuple(stamps) + cur.timestamps,
    )
    return PredictionContext(extended, ctx.user_history, ctx.now)


def boost_scores(scores: ScoredList, ctx: PredictionContext, cfg: BoostConfig) -> ScoredList:
    """Multiplies the score of every item seen in the user's history by 1 + b."""
    if cfg.boost == 0 or not ctx.user_history:
        return scores
    seen = {i for s in ctx.user_history for i in s.items}
    factor = 1.0 + cfg.boost
    boosted = {item: (score * factor if item in seen else score) for item, score in scores}
    return ScoredList.from_scores(boosted)


def _latest_interactions(sessions) -> dict[int, int]:
    latest: dict[int, int] = {}
    for s in sessions:
        for item, t in zip(s.items, s.timestamps):
            if t >= latest.get(item, t):
                latest[item] = t
    return latest


def irec_score(ctx: PredictionContext, item: int, num_past_sessions: Optional[int] = None) -> float:
    """Interaction recency T_c / (T_c - T_i) of ``item``, with T_i the user's
    latest interaction with it in the considered past sessions."""
    sessions = ctx.user_history if num_past_sessions is None else ctx.last_sessions(num_past_sessions)
    latest = _latest_interactions(sessions)
    if item not in latest:
        raise ValueError(f"item {item} does not occur in the considered past sessions")
    return _irec(ctx.now, latest[item])


def _irec(now: int, t_item: int) -> float:
    if t_item >= now:
        raise ValueError(f"interaction time {t_item} is not before the current session start {now}")
    return now / (now - t_item)


def ssim_score(item: int, sessions, sims: Mapping[int, float]) -> float:
    """Sum of the similarities of those past sessions that contain ``item``.

    ``sims`` maps session_id -> similarity to the current session.
    """
    total = 0.0
    for s in sessions:
        if item in s.items:
            total += sims.get(s.session_id, 0.0)
    return total


def _minmax(values: dict[int, float]) -> dict[int, float]:
    if not values:
        return {}
    lo, hi = min(values.values()), max(values.values())
    if hi == lo:
        return dict.fromkeys(values, 0.0)
    span = hi - lo
    return {k: (v - lo) / span for k, v in values.items()}


def remind_combine(
    scores: ScoredList,
    ctx: PredictionContext,
    cfg: RemindConfig,
    sims: Optional[Mapping[int, float]] = None,
) -> ScoredList:
    """Hybrid reminder: weighted sum of min-max normalized relevance,
    interaction recency and session similarity over the union of the base
    candidates and the items of the last ``num_past_sessions`` sessions.

    Without ``sims`` (non-neighbor base models) the similarity term is left out.
    """
    past = ctx.last_sessions(cfg.num_past_sessions)
    latest = _latest_interactions(past)
    base = scores.as_dict()
    candidates = list(base)
    candidates.extend(i for i in sorted(latest) if i not in base)

    # base scores tied up to float noise must stay tied after normalization
    rel = {i: tie_key(base.get(i, 0.0)) for i in candidates}
    if cfg.weight_irec:
        irec = {i: (_irec(ctx.now, latest[i]) if i in latest else 0.0) for i in candidates}
    else:
        irec = dict.fromkeys(candidates, 0.0)
    w_ssim = cfg.weight_ssim if sims is not None else 0
    if w_ssim:
        ssim = {i: ssim_score(i, past, sims) for i in candidates}
    else:
        ssim = dict.fromkeys(candidates, 0.0)

    rel, irec, ssim = _minmax(rel), _minmax(irec), _minmax(ssim)
    combined = {
        i: cfg.weight_rel * rel[i] + cfg.weight_irec * irec[i] + w_ssim * ssim[i] for i in candidates
    }
    return ScoredList.from_scores(combined, keep_zero=True)


@dataclass(frozen=True)
class Extensions:
    extend: Optional[ExtendConfig] = None
    boost: Optional[BoostConfig] = None
    remind: Optional[RemindConfig] = None

    @property
    def suffix(self) -> str:
        flags = "".join(f for f, on in (("e", self.extend), ("b", self.boost), ("r", self.remind)) if on)
        return f"_{flags}" if flags else ""


class SessionAwareRecommender:
    """A fitted base model with extensions applied around its ``predict``."""

    def __init__(self, model, extensions: Optional[Extensions] = None):
        self.model = model
        self.extensions = extensions or Extensions()

    @property
    def name(self) -> str:
        return self.model.method + self.extensions.suffix

    def predict(self, ctx: PredictionContext) -> ScoredList:
        ext = self.extensions
        if ext.extend is not None:
            ctx = extend_session(ctx, ext.extend)
        scores = self.model.predict(ctx)
        if ext.boost is not None:
            scores = boost_scores(scores, ctx, ext.boost)
        if ext.remind is not None:
            sims = None
            if ext.remind.weight_ssim:
                sims = past_session_similarities(self.model, ctx, ext.remind.num_past_sessions)
            scores = remind_combine(scores, ctx, ext.remind, sims)
        return scores


def past_session_similarities(model, ctx: PredictionContext, num_past_sessions: int) -> Optional[dict[int, float]]:
    """Similarity of the current session to each of the last past sessions,
    or None when ``model`` has no session similarity."""
    out: dict[int, float] = {}
    for past in ctx.last_sessions(num_past_sessions):
        sim = model.session_similarity(ctx.current_session, past)
        if sim is None:
            return None
        out[past.session_id] = sim
    return out


EXTENSION_PARAMS = {
    "extend_session_length",
    "boost_own_sessions",
    "remind_sessions_num",
    "weight_base",
    "weight_IRec",
    "weight_SSim",
}


def parse_algorithm_name(name: str) -> tuple[str, str]:
    """Splits ``vsknn_ebr`` into ("vsknn", "ebr")."""
    base, _, flags = name.partition("_")
    if not set(flags) <= set("ebr") or len(set(flags)) != len(flags):
        raise ConfigError(f"invalid extension suffix in {name!r}")
    return base, "".join(f for f in "ebr" if f in flags)


def split_params(flags: str, params: Mapping) -> tuple[dict, Extensions]:
    """Separates base hyperparameters from extension settings.

    Extension keys must match ``flags``; a boost of None or an absent key for
    a flagged extension is a configuration error.
    """
    base = {k: v for k, v in params.items() if k not in EXTENSION_PARAMS and k not in ("reminders", "remind_strategy")}
    ext = {k: v for k, v in params.items() if k in EXTENSION_PARAMS}

    def need(key):
        if key not in ext:
            raise ConfigError(f"missing extension parameter {key!r}")
        return ext[key]

    extend = ExtendConfig(int(need("extend_session_length"))) if "e" in flags else None
    boost = BoostConfig(float(need("boost_own_sessions"))) if "b" in flags else None
    remind = None
    if "r" in flags:
        remind = RemindConfig(
            num_past_sessions=int(need("remind_sessions_num")),
            weight_rel=int(need("weight_base")),
            weight_irec=int(ext.get("weight_IRec", 0)),
            weight_ssim=int(ext.get("weight_SSim", 0)),
        )
    return base, Extensions(extend, boost, remind)
