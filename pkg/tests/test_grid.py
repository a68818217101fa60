import numpy as np
import pytest

from mvir.errors import ValidationError
from mvir.grid import (Mask, edge_count, neighbors, neighbors_minus,
                       neighbors_plus)


def test_forward_neighbors_interior_and_corner():
    assert neighbors_plus((3, 3), (0, 0)) == [(1, 0), (0, 1)]
    assert neighbors_plus((3, 3), (2, 2)) == []
    assert neighbors_plus((1, 2), (0, 0)) == [(0, 1)]


def test_backward_neighbors():
    assert neighbors_minus((3, 3), (0, 0)) == []
    assert neighbors_minus((3, 3), (1, 1)) == [(0, 1), (1, 0)]
    assert neighbors_minus((1, 2), (0, 1)) == [(0, 0)]


def test_out_of_range_index_rejected():
    with pytest.raises(ValidationError):
        neighbors_plus((3, 3), (3, 0))
    with pytest.raises(ValidationError):
        neighbors_minus((3, 3), (0, -1))


@pytest.mark.parametrize("shape", [(1, 1), (1, 5), (4, 1), (3, 3), (4, 7)])
def test_forward_backward_duality(shape):
    rows, cols = shape
    for r in range(rows):
        for c in range(cols):
            for j in neighbors_plus(shape, (r, c)):
                assert (r, c) in neighbors_minus(shape, j)
            for j in neighbors_minus(shape, (r, c)):
                assert (r, c) in neighbors_plus(shape, j)


@pytest.mark.parametrize("shape", [(1, 1), (2, 2), (3, 5)])
def test_union_is_clipped_4_neighborhood(shape):
    rows, cols = shape
    for r in range(rows):
        for c in range(cols):
            got = set(neighbors(shape, (r, c)))
            expected = {(r + dr, c + dc) for dr, dc in
                        ((1, 0), (-1, 0), (0, 1), (0, -1))
                        if 0 <= r + dr < rows and 0 <= c + dc < cols}
            assert got == expected


@pytest.mark.parametrize("shape", [(1, 1), (1, 7), (5, 1), (3, 3), (6, 4)])
def test_edge_count(shape):
    rows, cols = shape
    # count undirected forward edges directly
    n = sum(len(neighbors_plus(shape, (r, c)))
            for r in range(rows) for c in range(cols))
    assert n == edge_count(shape) == rows * (cols - 1) + cols * (rows - 1)


def test_mask_requires_known_pixel():
    with pytest.raises(ValidationError):
        Mask(np.zeros((2, 2), dtype=bool))
    m = Mask.full((2, 3))
    assert m.n_known == 6
    assert m.shape == (2, 3)


def test_mask_rejects_wrong_rank():
    with pytest.raises(ValidationError):
        Mask(np.ones(4, dtype=bool))
