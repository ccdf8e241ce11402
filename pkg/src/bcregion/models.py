"""Model files, bundled example channels and random model generation.

A model file is one JSON document::

    {"k": 2,
     "aux": {"1": 2, "2": 2, "12": 2},
     "pmf": [...],          # mixed radix over aux in canonical order, last fastest
     "f": [...],            # X symbol for every joint auxiliary index
     "x_alphabet": 2,
     "y_alphabets": [2, 2],
     "channel": [...]}      # index x * prod|Y_k| + mixed_radix(y_1..y_K)
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from . import setfam
from .infodist import ModelSpec, ModelValidationError

REQUIRED_KEYS = ("k", "aux", "pmf", "f", "x_alphabet", "y_alphabets", "channel")
BUNDLED = ("k2_noiseless", "k2_product", "k3_bsbc")


def spec_from_dict(doc: dict) -> ModelSpec:
    if not isinstance(doc, dict):
        raise ModelValidationError("model: top level must be a JSON object")
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise ModelValidationError(f"model: missing key(s) {', '.join(missing)}")
    try:
        k = int(doc["k"])
        if not 1 <= k <= setfam.MAX_RECEIVERS:
            raise ModelValidationError(f"k: receiver count {k} outside 1..{setfam.MAX_RECEIVERS}")
        aux = {}
        for key, size in doc["aux"].items():
            try:
                mask = setfam.parse_subset(str(key), k)
            except ValueError as exc:
                raise ModelValidationError(f"aux: {exc}") from None
            if mask in aux:
                raise ModelValidationError(f"aux: subset {key!r} listed twice")
            aux[mask] = int(size)
        spec = ModelSpec(
            k_total=k,
            aux_alphabets=aux,
            aux_pmf=np.asarray(doc["pmf"], dtype=float),
            symbol_map=np.asarray(doc["f"], dtype=np.int64),
            x_alphabet=int(doc["x_alphabet"]),
            y_alphabets=tuple(int(a) for a in doc["y_alphabets"]),
            channel=np.asarray(doc["channel"], dtype=float),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelValidationError):
            raise
        raise ModelValidationError(f"model: malformed value ({exc})") from None
    spec.validate()
    return spec


def spec_to_dict(spec: ModelSpec) -> dict:
    k = spec.k_total
    return {
        "k": k,
        "aux": {setfam.format_subset(s, k): spec.aux_alphabets[s] for s in spec.aux_order},
        "pmf": [float(x) for x in spec.aux_pmf],
        "f": [int(x) for x in spec.symbol_map],
        "x_alphabet": int(spec.x_alphabet),
        "y_alphabets": [int(a) for a in spec.y_alphabets],
        "channel": [float(x) for x in spec.channel],
    }


def loads(text: str) -> ModelSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return spec_from_dict(doc)


def dumps(spec: ModelSpec) -> str:
    """One top-level key per line; floats use the shortest exact repr."""
    doc = spec_to_dict(spec)
    body = ",\n".join(f" {json.dumps(key)}: {json.dumps(val)}" for key, val in doc.items())
    return "{\n" + body + "\n}\n"


def load(path) -> ModelSpec:
    return loads(Path(path).read_text())


def normalize(spec: ModelSpec) -> ModelSpec:
    """Renormalize pmf and channel rows exactly; used by ``validate --normalize``."""
    pmf = spec.aux_pmf / spec.aux_pmf.sum()
    rows = spec.channel.reshape(spec.x_alphabet, -1)
    rows = rows / rows.sum(axis=1, keepdims=True)
    return ModelSpec(spec.k_total, dict(spec.aux_alphabets), pmf, spec.symbol_map.copy(),
                     spec.x_alphabet, spec.y_alphabets, rows.ravel())


def bundled_path(name: str):
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled model {name!r}; choose from {', '.join(BUNDLED)}")
    return resources.files("bcregion").joinpath("data").joinpath(f"{name}.json")


def bundled(name: str) -> ModelSpec:
    return loads(bundled_path(name).read_text())


# ------------------------------------------------------------- constructors

def aux_index_grid(alphabets: dict[int, int], k_total: int) -> dict[int, np.ndarray]:
    """Value of each auxiliary at every joint auxiliary index."""
    order = setfam.power_set(k_total)
    shape = tuple(alphabets[s] for s in order)
    idx = np.indices(shape).reshape(len(shape), -1)
    return {s: idx[i] for i, s in enumerate(order)}


def make_spec(k_total: int, aux_alphabets: dict[int, int], pmf, f, x_alphabet: int,
              y_alphabets, channel) -> ModelSpec:
    spec = ModelSpec(k_total, aux_alphabets, np.asarray(pmf, float), np.asarray(f, np.int64),
                     x_alphabet, tuple(y_alphabets), np.asarray(channel, float))
    spec.validate()
    return spec


def deterministic_channel(x_alphabet: int, y_alphabets, outputs) -> np.ndarray:
    """Channel where ``outputs(x)`` gives the tuple ``(y_1..y_K)`` with probability 1."""
    n_y = int(np.prod(y_alphabets))
    chan = np.zeros((x_alphabet, n_y))
    for x in range(x_alphabet):
        chan[x, np.ravel_multi_index(tuple(outputs(x)), tuple(y_alphabets))] = 1.0
    return chan.ravel()


def product_channel(marginals) -> np.ndarray:
    """Outputs conditionally independent given x; ``marginals[k]`` is |X| x |Y_k|."""
    marginals = [np.asarray(m, float) for m in marginals]
    x_alphabet = marginals[0].shape[0]
    rows = []
    for x in range(x_alphabet):
        row = np.ones(1)
        for m in marginals:
            row = np.multiply.outer(row, m[x]).ravel()
        rows.append(row)
    return np.concatenate(rows)


def bsc(p: float) -> np.ndarray:
    return np.array([[1 - p, p], [p, 1 - p]])


def layered_pmf(alphabets: dict[int, int], k_total: int, rng: np.random.Generator,
                alpha: float = 1.0, coupling: float = 0.0) -> np.ndarray:
    """Auxiliary pmf drawn level by level, top level first.

    Each ``U_S`` gets a Dirichlet(alpha) conditional given its proper
    supersets, so same-level auxiliaries are conditionally independent.
    ``coupling`` mixes in a Dirichlet(1) joint pmf to make them dependent.
    """
    order = setfam.power_set(k_total)
    grid = aux_index_grid(alphabets, k_total)
    n = grid[order[0]].size
    p = np.ones(n)
    for s in sorted(order, key=lambda s: -setfam.popcount(s)):
        code = np.zeros(n, dtype=np.int64)
        size = 1
        for t in setfam.a_all(s, k_total):
            if t != s:
                code = code * alphabets[t] + grid[t]
                size *= alphabets[t]
        table = rng.dirichlet(np.full(alphabets[s], alpha), size=size)
        p *= table[code, grid[s]]
    p /= p.sum()
    if coupling > 0.0:
        p = (1.0 - coupling) * p + coupling * rng.dirichlet(np.ones(n))
    return p


def random_model(k_total: int, rng: np.random.Generator, aux_alphabet: int = 2,
                 x_alphabet: int = 2, y_alphabet: int = 2,
                 aux_alphabets: dict[int, int] | None = None,
                 coupling: float | None = None, channel_concentration: float = 0.3) -> ModelSpec:
    """Random model with a layered auxiliary pmf and a uniform random encoder map.

    ``coupling`` defaults to a U(0, 0.1) draw.  Channel rows are
    Dirichlet(channel_concentration); values below 1 give less noisy outputs.
    Fully random Dirichlet(1) auxiliary pmfs almost always give the all-zero
    region for K = 3, which makes them useless as test inputs.
    """
    if aux_alphabets is None:
        aux_alphabets = {s: aux_alphabet for s in setfam.power_set(k_total)}
    if coupling is None:
        coupling = float(rng.uniform(0.0, 0.1))
    pmf = layered_pmf(aux_alphabets, k_total, rng, coupling=coupling)
    f = rng.integers(0, x_alphabet, size=pmf.size)
    n_y = y_alphabet ** k_total
    channel = rng.dirichlet(np.full(n_y, channel_concentration), size=x_alphabet).ravel()
    return make_spec(k_total, aux_alphabets, pmf, f, x_alphabet, (y_alphabet,) * k_total, channel)


def degenerate_slice(spec: ModelSpec, subsets) -> tuple[ModelSpec, np.ndarray]:
    """Pin the auxiliaries in ``subsets`` to symbol 0.

    Returns the model with those alphabets reduced to 1 (pmf restricted to
    the slice and renormalized, encoder restricted) and the same pmf
    embedded back into ``spec``'s alphabets, zero off the slice.
    """
    k = spec.k_total
    subsets = set(subsets)
    grid = aux_index_grid(spec.aux_alphabets, k)
    on = np.ones(spec.aux_pmf.size, dtype=bool)
    for s in subsets:
        on &= grid[s] == 0
    mass = spec.aux_pmf[on].sum()
    if mass <= 0:
        raise ValueError("the pinned slice has zero probability")
    embedded = np.where(on, spec.aux_pmf, 0.0) / mass
    alphabets = {s: (1 if s in subsets else a) for s, a in spec.aux_alphabets.items()}
    # canonical mixed-radix order is preserved when a digit is fixed at 0
    small = make_spec(k, alphabets, embedded[on], spec.symbol_map[on], spec.x_alphabet,
                      spec.y_alphabets, spec.channel)
    return small, embedded
