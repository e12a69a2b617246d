"""Named, reproducible random substreams derived from one root seed."""

from __future__ import annotations

import hashlib

import numpy as np


def substream(seed: int, *names: str) -> np.random.Generator:
    """Return an independent PCG64 generator keyed by (seed, names).

    The same (seed, names) always yields the same stream; distinct name
    paths are statistically independent, so e.g. the population draw is
    unaffected by how many exploration streams a run consumes.
    """
    digest = hashlib.sha256("/".join(names).encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))
