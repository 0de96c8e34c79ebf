import math

import numpy as np
import pytest

import ledsna


def halves(h=8, w=8):
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[:, w // 2:] = 255
    return img


def test_grid_and_adjacency():
    labels = ledsna.grid(4, 4, 2, 2)
    assert labels.shape == (4, 4)
    assert labels.dtype == np.int32
    assert ledsna.adjacency(labels) == [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_slic_splits_halves():
    labels = ledsna.slic(halves(10, 20), k=2, compactness=40.0)
    assert labels.max() == 1
    assert (labels[:, :10] == labels[0, 0]).all()
    assert (labels[:, 10:] == labels[0, -1]).all()


def test_connected_samples_on_a_path():
    masks = ledsna.sample_connected(3, [(0, 1), (1, 2)], 2000, seed=1)
    assert masks.shape == (2000, 3)
    assert not any((m == [1, 0, 1]).all() for m in masks)


def test_metrics():
    assert ledsna.approx_error(0.6076, 0.8129) == pytest.approx(0.2053)
    assert ledsna.r_squared([0, 1, 1, 0], [0.25, 0.75, 0.75, 0.25]) == pytest.approx(0.75)
    assert ledsna.r_squared([0.5, 0.5], [0.5, 0.6]) is None


def test_explain_image_with_builtin():
    img = halves()
    labels = ledsna.grid(8, 8, 2, 2)
    e = ledsna.explain_image(img, labels, "builtin:quadratic-logit:3", n_samples=200, seed=2, k=2)
    assert len(e["attributions"]) == 4
    assert len(e["top_k"]) == 2
    assert e["err"] >= 0


def test_explain_image_with_python_callable():
    seen = []

    def bright(images):
        seen.append(len(images))
        return [float(im.mean()) / 255.0 for im in images]

    img = halves()
    e = ledsna.explain_image(img, ledsna.grid(8, 8, 1, 2), bright, n_samples=50, hide_color=(0, 0, 0),
                             surrogate="ridge", lambda_=0.0)
    assert sum(seen) == 51
    assert e["surrogate"] == "ridge"
    # Only the white half carries signal; hiding it to black costs 0.5.
    w = [a["weight"] for a in e["attributions"]]
    assert w[1] == pytest.approx(0.5, abs=1e-9)
    assert w[0] == pytest.approx(0.0, abs=1e-9)


def test_explain_text_groups_and_errors():
    def positive(batch):
        return [1.0 / (1.0 + math.exp(-(t.count("great") - t.count("awful")))) for t in batch]

    e = ledsna.explain_text("an awful start but a great end", positive, groups=[[0, 1, 2], [3], [4, 5, 6]], k=1)
    assert e["top_k"] == [2]
    assert e["attributions"][0]["tokens"] == ["an", "awful", "start"]
    with pytest.raises(ValueError, match="token index 0"):
        ledsna.explain_text("a b", positive, groups=[[0], [0, 1]])
    with pytest.raises(ledsna.BlackBoxError):
        ledsna.explain_text("a b", lambda batch: [2.0] * len(batch))
    with pytest.raises(TypeError):
        ledsna.config(colour="red")


def test_overlay_and_ppm_round_trip(tmp_path):
    img = halves()
    labels = ledsna.grid(8, 8, 1, 2)
    out = ledsna.overlay(img, labels, [0])
    assert (out[:, 4:] == 77).all()
    path = tmp_path / "x.ppm"
    ledsna.write_ppm(str(path), out)
    assert (ledsna.read_ppm(str(path)) == out).all()
