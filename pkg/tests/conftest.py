import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import FIG1A_QUESTION  # noqa: E402

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def fig1a_question():
    return FIG1A_QUESTION


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR


@pytest.fixture
def demo_scene_dict():
    """Three objects: two yellow small spheres (rubber/metal) and a large red
    rubber cube, on a consistent coordinate grid."""
    return {
        "image_index": 7,
        "objects": [
            {"size": "small", "color": "yellow", "material": "rubber", "shape": "sphere",
             "3d_coords": [0.0, 1.0, 0.35]},
            {"size": "small", "color": "yellow", "material": "metal", "shape": "sphere",
             "3d_coords": [1.0, 0.0, 0.35]},
            {"size": "large", "color": "red", "material": "rubber", "shape": "cube",
             "3d_coords": [2.0, 2.0, 0.7]},
        ],
        "relationships": {
            "left": [[], [0], [0, 1]],
            "right": [[1, 2], [2], []],
            "front": [[2], [0, 2], []],
            "behind": [[1], [], [0, 1]],
        },
    }
