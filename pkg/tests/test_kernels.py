import os
import random
import subprocess
import sys

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_edit_distance
from falarm.kernels import NUMBA_ENABLED, _align_counts_numpy, align_counts

ids = st.lists(st.integers(0, 4), min_size=0, max_size=10)


def test_empty_vs_empty():
    assert align_counts(np.array([], np.int32), np.array([], np.int32)) == (0, 0, 0)


def test_pure_insertions():
    assert align_counts(np.array([], np.int32), np.array([1, 2, 3], np.int32)) == (
        3, 0, 0,
    )


def test_pure_deletions():
    assert align_counts(np.array([1, 2, 3], np.int32), np.array([], np.int32)) == (
        0, 3, 0,
    )


def test_substitution_preferred_over_indel_pair():
    # cost 1 either way is impossible here, but at equal total cost the
    # kernel must favor a substitution over a delete+insert pair
    assert align_counts(np.array([1], np.int32), np.array([2], np.int32)) == (0, 0, 1)


@settings(max_examples=400, deadline=None)
@given(ids, ids)
def test_paths_agree(a, b):
    ra = np.array(a, np.int32)
    rb = np.array(b, np.int32)
    assert align_counts(ra, rb) == _align_counts_numpy(ra, rb)


@settings(max_examples=300, deadline=None)
@given(ids, ids)
def test_total_matches_script_enumeration(a, b):
    i, d, s = align_counts(np.array(a, np.int32), np.array(b, np.int32))
    assert i + d + s == brute_force_edit_distance(a, b)
    assert i - d == len(b) - len(a)
    assert i >= 0 and d >= 0 and s >= 0


def test_random_long_sequences():
    rng = random.Random(7)
    for _ in range(50):
        a = [rng.randrange(8) for _ in range(rng.randint(0, 60))]
        b = [rng.randrange(8) for _ in range(rng.randint(0, 60))]
        ra = np.array(a, np.int32)
        rb = np.array(b, np.int32)
        i, d, s = align_counts(ra, rb)
        ri, rd, rs = align_counts(rb, ra)
        assert (i, d, s) == (rd, ri, rs)
        assert align_counts(ra, rb) == _align_counts_numpy(ra, rb)


def test_env_flag_disables_numba():
    code = (
        "import falarm.kernels as k; import numpy as np; "
        "assert not k.NUMBA_ENABLED; "
        "print(k.align_counts(np.array([1,2,3],np.int32), np.array([1,9,3,4],np.int32)))"
    )
    env = dict(os.environ, FALARM_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "(1, 0, 1)"


def test_numba_enabled_by_default():
    # the test environment has numba installed, so the compiled path should
    # be active unless the escape hatch is set
    if os.environ.get("FALARM_NO_NUMBA"):
        assert not NUMBA_ENABLED
    else:
        assert NUMBA_ENABLED
