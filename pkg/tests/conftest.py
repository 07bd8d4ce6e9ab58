import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gec_ensemble.scoring import NGramModel


@pytest.fixture(scope="session")
def tiny_model() -> NGramModel:
    """Small trigram model over a mixed CJK/ASCII corpus; used wherever a
    test only needs a deterministic backend, not particular preferences."""
    corpus = [
        "我的家附近有很多考试补习班。",
        "我小时候很想养狗。",
        "可它的表情是我从来没见过的。",
        "the quick brown fox jumps over the lazy dog",
        "abcabcabc",
        "一天一天地过去了。",
    ]
    return NGramModel.train(corpus, order=3, k=0.1)
