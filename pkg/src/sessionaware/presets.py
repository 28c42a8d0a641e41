"""Shipped hyperparameter search spaces and tuned optima for the four reference datasets."""

from __future__ import annotations

_LAMBDA_GRID = (0.00001, 0.4525, 0.905, 1.81, 3.62, 7.24)
_IDF = (False, 1, 2, 5, 10)

BASE_SPACES: dict[str, dict[str, tuple]] = {
    "sr": {
        "steps": tuple(range(2, 16)) + (20, 25, 30),
        "weighting": ("linear", "div", "quadratic", "log"),
    },
    "vsknn": {
        "k": (50, 100, 500, 1000, 1500),
        "sample_size": (500, 1000, 2500, 5000, 10000),
        "weighting": ("same", "div", "linear", "quadratic", "log"),
        "weighting_score": ("same", "div", "linear", "quadratic", "log"),
        "idf_weighting": _IDF,
    },
    "stan": {
        "k": (100, 200, 500, 1000, 1500, 2000),
        "sample_size": (1000, 2500, 5000, 10000),
        "lambda_spw": _LAMBDA_GRID,
        "lambda_snh": (2.5, 5, 10, 20, 40, 80, 100),
        "lambda_inh": _LAMBDA_GRID,
    },
    "vstan": {
        "k": (100, 200, 500, 1000, 1500, 2000),
        "sample_size": (1000, 2500, 5000, 10000),
        "similarity": ("cosine", "vec"),
        "lambda_spw": _LAMBDA_GRID,
        "lambda_snh": (2.5, 5, 10, 20, 40, 80, 100),
        "lambda_inh": _LAMBDA_GRID,
        "lambda_ipw": _LAMBDA_GRID,
        "lambda_idf": _IDF,
    },
}

# 20 steps from 0.1 to 3.9
BOOST_SPACE = {"boost_own_sessions": tuple(round(0.1 + 0.2 * i, 1) for i in range(20))}
EXTEND_SPACE = {"extend_session_length": tuple(range(1, 26))}
REMIND_SPACE = {
    "remind_sessions_num": tuple(range(1, 11)),
    "weight_base": tuple(range(1, 11)),
    "weight_IRec": tuple(range(0, 10)),
    "weight_SSim": tuple(range(0, 10)),
}

# Optional per-dataset grids for lambda_spw / lambda_inh / lambda_ipw, scaled
# by mean session length.
DATASET_LAMBDA_GRIDS = {
    "retail": (0.785, 1.57, 3.14, 6.28, 12.56),
    "xing": (0.7025, 1.405, 2.81, 5.62, 11.24),
    "cosmetics": (1.03, 2.06, 4.12, 8.24, 16.48),
    "lastfm": (0.99, 1.98, 3.96, 7.92, 15.84),
}

DATASET_PREPROCESSING = {
    "retail": {},
    "xing": {},
    "cosmetics": {"user_sample": 0.1},
    "lastfm": {"max_session_length": 20, "skip_head": 500 * 86400},
}


def _remind(p, base, irec, ssim=None):
    out = {"remind_sessions_num": p, "weight_base": base, "weight_IRec": irec}
    if ssim is not None:
        out["weight_SSim"] = ssim
    return out


# Tuned optima per dataset; keys are algorithm names with extension suffixes.
OPTIMA: dict[str, dict[str, dict]] = {
    "retail": {
        "sr": {"steps": 15, "weighting": "quadratic"},
        "sr_br": {"steps": 12, "weighting": "quadratic", "boost_own_sessions": 3.1, **_remind(2, 5, 3)},
        "vsknn": {"k": 50, "sample_size": 500, "weighting": "log", "weighting_score": "linear", "idf_weighting": 10},
        "vsknn_ebr": {
            "k": 1500, "sample_size": 1000, "weighting": "log", "weighting_score": "linear", "idf_weighting": 1,
            "extend_session_length": 8, "boost_own_sessions": 0.1, **_remind(4, 8, 1, 1),
        },
        "stan": {"k": 1500, "sample_size": 2500, "lambda_spw": 0.905, "lambda_snh": 100, "lambda_inh": 0.4525},
        "stan_er": {
            "k": 200, "sample_size": 1000, "lambda_spw": 0.905, "lambda_snh": 100, "lambda_inh": 0.905,
            "extend_session_length": 2, **_remind(9, 10, 3, 2),
        },
        "vstan": {
            "k": 200, "sample_size": 5000, "similarity": "vec", "lambda_spw": 1.81, "lambda_snh": 40,
            "lambda_inh": 0.905, "lambda_ipw": 0.905, "lambda_idf": False,
        },
        "vstan_ebr": {
            "k": 2000, "sample_size": 10000, "similarity": "cosine", "lambda_spw": 0.905, "lambda_snh": 80,
            "lambda_inh": 1.81, "lambda_ipw": 3.62, "lambda_idf": 5,
            "extend_session_length": 5, "boost_own_sessions": 0.1, **_remind(2, 6, 2, 0),
        },
    },
    "xing": {
        "sr": {"steps": 25, "weighting": "quadratic"},
        "sr_br": {"steps": 30, "weighting": "quadratic", "boost_own_sessions": 1.9, **_remind(6, 8, 4)},
        "vsknn": {"k": 100, "sample_size": 500, "weighting": "log", "weighting_score": "quadratic", "idf_weighting": 10},
        "vsknn_r": {
            "k": 100, "sample_size": 500, "weighting": "log", "weighting_score": "quadratic", "idf_weighting": 10,
            **_remind(8, 2, 1, 0),
        },
        "stan": {"k": 100, "sample_size": 10000, "lambda_spw": 0.4525, "lambda_snh": 80, "lambda_inh": 0.4525},
        "stan_r": {
            "k": 100, "sample_size": 10000, "lambda_spw": 0.4525, "lambda_snh": 80, "lambda_inh": 0.4525,
            **_remind(3, 10, 2, 1),
        },
        "vstan": {
            "k": 1500, "sample_size": 10000, "similarity": "cosine", "lambda_spw": 3.62, "lambda_snh": 20,
            "lambda_inh": 0.4525, "lambda_ipw": 0.4525, "lambda_idf": 10,
        },
        "vstan_r": {
            "k": 1500, "sample_size": 10000, "similarity": "cosine", "lambda_spw": 3.62, "lambda_snh": 20,
            "lambda_inh": 0.4525, "lambda_ipw": 0.4525, "lambda_idf": 10, **_remind(3, 9, 1, 5),
        },
    },
    "cosmetics": {
        "sr": {"steps": 15, "weighting": "div"},
        "sr_br": {"steps": 15, "weighting": "div", "boost_own_sessions": 3.7, **_remind(9, 8, 3)},
        "vsknn": {"k": 100, "sample_size": 10000, "weighting": "quadratic", "weighting_score": "div", "idf_weighting": 10},
        "vsknn_ebr": {
            "k": 1500, "sample_size": 10000, "weighting": "quadratic", "weighting_score": "div", "idf_weighting": 10,
            "extend_session_length": 2, "boost_own_sessions": 0.9, **_remind(10, 9, 2, 3),
        },
        "stan": {"k": 500, "sample_size": 2500, "lambda_spw": 0.905, "lambda_snh": 40, "lambda_inh": 0.4525},
        "stan_ebr": {
            "k": 1500, "sample_size": 5000, "lambda_spw": 0.905, "lambda_snh": 100, "lambda_inh": 7.24,
            "extend_session_length": 2, "boost_own_sessions": 1.9, **_remind(4, 10, 1, 1),
        },
        "vstan": {
            "k": 500, "sample_size": 1000, "similarity": "cosine", "lambda_spw": 3.62, "lambda_snh": 80,
            "lambda_inh": 0.4525, "lambda_ipw": 0.905, "lambda_idf": False,
        },
        "vstan_ebr": {
            "k": 500, "sample_size": 1000, "similarity": "cosine", "lambda_spw": 0.905, "lambda_snh": 80,
            "lambda_inh": 0.4525, "lambda_ipw": 3.62, "lambda_idf": 1,
            "extend_session_length": 1, "boost_own_sessions": 3.1, **_remind(5, 7, 1, 0),
        },
    },
    "lastfm": {
        "sr": {"steps": 8, "weighting": "quadratic"},
        "sr_b": {"steps": 20, "weighting": "quadratic", "boost_own_sessions": 3.1},
        "vsknn": {"k": 50, "sample_size": 500, "weighting": "quadratic", "weighting_score": "quadratic", "idf_weighting": 5},
        "vsknn_eb": {
            "k": 50, "sample_size": 500, "weighting": "quadratic", "weighting_score": "quadratic", "idf_weighting": 1,
            "extend_session_length": 3, "boost_own_sessions": 2.5,
        },
        "stan": {"k": 100, "sample_size": 10000, "lambda_spw": 0.00001, "lambda_snh": 80, "lambda_inh": 3.62},
        "stan_ebr": {
            "k": 100, "sample_size": 2500, "lambda_spw": 0.00001, "lambda_snh": 100, "lambda_inh": 7.24,
            "extend_session_length": 17, "boost_own_sessions": 2.7, **_remind(3, 5, 0, 6),
        },
        "vstan": {
            "k": 1000, "sample_size": 5000, "similarity": "cosine", "lambda_spw": 1.81, "lambda_snh": 100,
            "lambda_inh": 1.81, "lambda_ipw": 0.0001, "lambda_idf": False,
        },
        "vstan_eb": {
            "k": 1000, "sample_size": 10000, "similarity": "cosine", "lambda_spw": 0.4525, "lambda_snh": 100,
            "lambda_inh": 3.62, "lambda_ipw": 0.4525, "lambda_idf": 5,
            "extend_session_length": 7, "boost_own_sessions": 3.7,
        },
    },
}


def preset(dataset: str, algorithm: str) -> dict:
    """Tuned hyperparameters for ``algorithm`` on ``dataset`` (a copy)."""
    try:
        return dict(OPTIMA[dataset.lower()][algorithm])
    except KeyError:
        known = sorted(OPTIMA.get(dataset.lower(), {}))
        raise KeyError(f"no preset for {algorithm!r} on {dataset!r}; available: {known}") from None
