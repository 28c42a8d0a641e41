"""Naive reference implementations used as test oracles.

Everything here works by full scans over plain lists: no inverted index, no
candidate-pool machinery, no shared code with the package beyond the Session
container.
"""

import math

DAY = 86400.0


# -- decay ---------------------------------------------------------------


def session_decay(scheme, p, length):
    back = length - p
    table = {
        "same": lambda: 1.0,
        "linear": lambda: max(0.0, 1.0 - 0.1 * back),
        "div": lambda: p / length,
        "quadratic": lambda: (p / length) ** 2,
        "log": lambda: 1.0 / math.log10(back + 1.7),
    }
    return table[scheme]()


def rule_decay(scheme, x):
    table = {
        "same": 1.0,
        "linear": max(0.0, 1.0 - 0.1 * x),
        "div": 1.0 / x,
        "quadratic": 1.0 / (x * x),
        "log": 1.0 / math.log10(x + 1.7),
    }
    return table[scheme]


def rank(scores, keep_zero=False):
    pairs = [(i, s) for i, s in scores.items() if keep_zero or s > 0]
    # equal to 12 significant digits counts as a tie
    pairs.sort(key=lambda p: (-round(p[1], 11 - math.floor(math.log10(abs(p[1])))) if p[1] else 0.0, p[0]))
    return pairs


# -- sequential rules ----------------------------------------------------


def sr_scores(train_sessions, current_items, steps, weighting):
    last = current_items[-1]
    scores = {}
    for s in train_sessions:
        seq = s.items
        for i in range(len(seq)):
            for j in range(i + 1, len(seq)):
                if j - i > steps or seq[i] != last:
                    continue
                w = rule_decay(weighting, j - i)
                if w > 0:
                    scores[seq[j]] = scores.get(seq[j], 0.0) + w
    return rank(scores)


# -- neighborhood methods ------------------------------------------------


def last_pos(items):
    """item -> last 1-based position, as a list ordered by that position."""
    out = {}
    for idx in range(len(items)):
        out[items[idx]] = idx + 1
    return sorted(out.items(), key=lambda kv: kv[1])


def weighted_sim(weights, other_items, normalize):
    other = set(other_items)
    dot = 0.0
    for item, w in weights:
        if item in other:
            dot += w
    if dot == 0.0:
        return 0.0
    if not normalize:
        return dot
    norm = math.sqrt(sum(w * w for _, w in weights))
    return dot / (norm * math.sqrt(len(other)))


def _neighbors(train_sessions, current_items, now, weights, k, sample_size, normalize, recency=None):
    cur = set(current_items)
    ordered = sorted(train_sessions, key=lambda s: (s.start_time, s.session_id))
    pool = [s for s in ordered if cur & set(s.items)]
    if sample_size is not None and len(pool) > sample_size:
        pool = pool[len(pool) - sample_size:]
    cands = []
    for s in pool:
        sim = weighted_sim(weights, s.items, normalize)
        if sim <= 0:
            continue
        w = sim
        if recency is not None:
            w = sim * math.exp(-(abs(now - s.start_time) / DAY) / recency)
        if w > 0:
            cands.append((w, s))
    cands.sort(key=lambda c: (-c[0], -c[1].start_time, -c[1].session_id))
    top = cands[:k]
    top.sort(key=lambda c: (c[1].start_time, c[1].session_id))
    return top


def idf_table(train_sessions):
    n = len(train_sessions)
    df = {}
    for s in train_sessions:
        for i in set(s.items):
            df[i] = df.get(i, 0) + 1
    return {i: math.log(n / c) for i, c in df.items()}


def vsknn_scores(train_sessions, current_items, now, k, sample_size, weighting, weighting_score, idf_weighting):
    L = len(current_items)
    lp = last_pos(current_items)
    weights = [(i, session_decay(weighting, p, L)) for i, p in lp]
    idf = idf_table(train_sessions)
    scores = {}
    for w, s in _neighbors(train_sessions, current_items, now, weights, k, sample_size, True):
        ref = max(p for i, p in lp if i in set(s.items))
        contrib = w * session_decay(weighting_score, ref, L)
        for item in set(s.items):
            val = contrib * (1.0 + idf_weighting * idf[item]) if idf_weighting else contrib
            scores[item] = scores.get(item, 0.0) + val
    return rank(scores)


def sknn_cosine_scores(train_sessions, current_items, k):
    """Plain binary-cosine session kNN, written from scratch."""
    cur = set(current_items)
    sims = []
    for s in train_sessions:
        other = set(s.items)
        inter = len(cur & other)
        if inter:
            sims.append((inter / (math.sqrt(len(cur)) * math.sqrt(len(other))), s))
    sims.sort(key=lambda c: (-c[0], -c[1].start_time, -c[1].session_id))
    top = sorted(sims[:k], key=lambda c: (c[1].start_time, c[1].session_id))
    scores = {}
    for sim, s in top:
        for item in set(s.items):
            scores[item] = scores.get(item, 0.0) + sim
    return rank(scores)


def _closest(seq, item, ref):
    positions = [p for p in range(1, len(seq) + 1) if seq[p - 1] == item]
    return min(positions, key=lambda p: (abs(p - ref), -p))


def stan_like_scores(
    train_sessions,
    current_items,
    now,
    k,
    sample_size,
    lambda_spw,
    lambda_snh,
    lambda_inh,
    similarity="cosine",
    lambda_ipw=None,
    lambda_idf=0,
):
    L = len(current_items)
    weights = [(i, math.exp((p - L) / lambda_spw)) for i, p in last_pos(current_items)]
    cur = set(current_items)
    idf = idf_table(train_sessions)
    lo, hi = min(idf.values()), max(idf.values())
    scores = {}
    for w, s in _neighbors(
        train_sessions, current_items, now, weights, k, sample_size, similarity == "cosine", recency=lambda_snh
    ):
        seq = s.items
        ref = max(p for p in range(1, len(seq) + 1) if seq[p - 1] in cur)
        for item in set(seq):
            pos = _closest(seq, item, ref)
            f = math.exp(-abs(pos - ref) / lambda_inh)
            if lambda_ipw is not None:
                f = f * math.exp((pos - len(seq)) / lambda_ipw)
            bonus = 1.0
            if lambda_idf and hi > lo:
                bonus = 1.0 + lambda_idf * (idf[item] - lo) / (hi - lo)
            scores[item] = scores.get(item, 0.0) + w * f * bonus
    return rank(scores)


# -- metrics ---------------------------------------------------------------


def naive_metrics(events, k, catalog, train_counts):
    """events: list of (ranked list, next item, remaining list)."""
    n = len(events)
    hr = mrr = prec = rec = ap_sum = 0.0
    shown = set()
    pop_vals = []
    cmin, cmax = min(train_counts.values()), max(train_counts.values())
    for ranked, nxt, remaining in events:
        top = list(ranked)[:k]
        rel = set(remaining)
        if nxt in top:
            hr += 1
            mrr += 1.0 / (top.index(nxt) + 1)
        hits = [1 if x in rel else 0 for x in top]
        prec += sum(hits) / k
        rec += sum(hits) / len(rel)
        ap = 0.0
        for i in range(1, len(top) + 1):
            if hits[i - 1]:
                ap += sum(hits[:i]) / i
        ap_sum += ap / min(len(rel), k)
        shown.update(top)
        for x in top:
            pop_vals.append(0.0 if cmax == cmin else (train_counts[x] - cmin) / (cmax - cmin))
    return {
        "HR": hr / n,
        "MRR": mrr / n,
        "Precision": prec / n,
        "Recall": rec / n,
        "MAP": ap_sum / n,
        "Coverage": len(shown & set(catalog)) / len(catalog),
        "Popularity": sum(pop_vals) / len(pop_vals) if pop_vals else 0.0,
    }


# -- sessionization ----------------------------------------------------------


def naive_sessions(events, gap):
    """events: list of (user, item, ts). Quadratic re-segmentation: an event
    starts a new session unless some earlier event of the same user lies
    within ``gap`` before it and no later-in-order event of that user
    intervenes."""
    evs = sorted(events, key=lambda e: (e[0], e[2], e[1]))
    sessions = []
    for idx, (u, i, t) in enumerate(evs):
        prev = [e for e in evs[:idx] if e[0] == u]
        if prev and t - prev[-1][2] <= gap:
            sessions[-1].append((u, i, t))
        else:
            sessions.append([(u, i, t)])
    return [[(i, t) for _, i, t in s] for s in sessions]
