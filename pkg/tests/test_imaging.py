import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pmcut.errors import FormatError, InvalidArgumentError
from pmcut.imaging import (
    RawImage,
    add_gaussian_noise,
    add_salt_pepper,
    boundary_mask,
    decode_image,
    encode_label_map,
    from_gray,
    read_image,
    read_label_map,
    render_overlay,
    salt_pepper_count,
    to_gray_normalized,
    write_image,
    write_label_map,
)

gray8 = st.tuples(st.integers(1, 9), st.integers(1, 9)).flatmap(
    lambda s: arrays(np.uint8, s, elements=st.integers(0, 255))
)


@given(gray8)
def test_p5_round_trip(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("img") / "a.pgm"
    raw = RawImage.from_array(data)
    write_image(raw, path)
    np.testing.assert_array_equal(read_image(path).data, data)


@given(gray8)
def test_p2_and_p5_read_identically(tmp_path_factory, data):
    d = tmp_path_factory.mktemp("img")
    raw = RawImage.from_array(data)
    write_image(raw, d / "a.pgm")
    write_image(raw, d / "b.pgm", plain=True)
    assert (d / "b.pgm").read_bytes()[:2] == b"P2"
    np.testing.assert_array_equal(read_image(d / "a.pgm").data, read_image(d / "b.pgm").data)


def test_ppm_round_trip(tmp_path):
    data = np.random.default_rng(0).integers(0, 256, size=(4, 5, 3), dtype=np.uint8)
    write_image(RawImage.from_array(data), tmp_path / "c.ppm")
    raw = read_image(tmp_path / "c.ppm")
    assert raw.channels == 3 and (raw.width, raw.height) == (5, 4)
    np.testing.assert_array_equal(raw.data, data)


def test_comments_tolerated_never_written(tmp_path):
    payload = b"P5\n# a comment\n2 1 # trailing\n255\n\x00\xff"
    raw = decode_image(payload)
    np.testing.assert_array_equal(raw.data, [[0, 255]])
    write_image(raw, tmp_path / "x.pgm")
    assert b"#" not in (tmp_path / "x.pgm").read_bytes()


@pytest.mark.parametrize(
    "payload,offset",
    [
        (b"P5\n2 2\n255\n\x00\x01\x02", 14),  # truncated raster
        (b"P5\n2 2\n", 7),  # truncated header
        (b"P7\n2 2\n255\n", 0),  # bad magic
        (b"P5\n2 x\n255\n", 5),  # non-numeric token
        (b"P5\n0 2\n255\n", 3),  # zero width
        (b"P2\n2 1\n255\n0 300\n", 13),  # sample above maxval
    ],
)
def test_format_errors_carry_offsets(payload, offset):
    with pytest.raises(FormatError) as info:
        decode_image(payload)
    assert info.value.offset == offset
    assert f"at byte {offset}" in str(info.value)


def test_maxval_other_than_255_rejected_for_images():
    with pytest.raises(FormatError):
        decode_image(b"P5\n1 1\n15\n\x03")


def test_truncated_file_gives_no_image(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n4 4\n255\n\x00\x00")
    with pytest.raises(FormatError):
        read_image(p)


def test_label_maps_small_and_large(tmp_path):
    small = np.arange(12).reshape(3, 4)
    write_label_map(small, tmp_path / "s.pgm")
    assert (tmp_path / "s.pgm").read_bytes()[:2] == b"P5"
    np.testing.assert_array_equal(read_label_map(tmp_path / "s.pgm"), small)
    big = np.arange(600).reshape(20, 30)
    text = encode_label_map(big)
    assert text.startswith(b"P2\n30 20\n599\n")
    write_label_map(big, tmp_path / "b.pgm")
    np.testing.assert_array_equal(read_label_map(tmp_path / "b.pgm"), big)


def test_sixteen_bit_raster_labels():
    payload = b"P5\n2 1\n1000\n" + np.array([3, 999], dtype=">u2").tobytes()
    from pmcut.imaging import parse_netpbm

    magic, samples, maxval = parse_netpbm(payload)
    assert maxval == 1000 and samples.tolist() == [[3, 999]]


def test_gray_normalization():
    white = RawImage.from_array(np.full((2, 2), 255, np.uint8))
    assert np.all(to_gray_normalized(white) == 1.0)
    red = RawImage.from_array(np.array([[[255, 0, 0]]], np.uint8))
    assert to_gray_normalized(red)[0, 0] == pytest.approx(0.299)
    g = RawImage.from_array(np.array([[0, 51, 102]], np.uint8))
    np.testing.assert_allclose(to_gray_normalized(g), [[0.0, 0.2, 0.4]])


@given(gray8)
def test_gray_quantization_round_trip(data):
    raw = RawImage.from_array(data)
    np.testing.assert_array_equal(from_gray(to_gray_normalized(raw)).data, data)


# -- noise --------------------------------------------------------------------


def test_gaussian_zero_is_identity():
    y = np.random.default_rng(0).random((5, 6))
    np.testing.assert_array_equal(add_gaussian_noise(y, 0.0, seed=1), y)


def test_gaussian_reproducible_and_clamped():
    y = np.random.default_rng(0).random((30, 30))
    a = add_gaussian_noise(y, 0.3, seed=7)
    np.testing.assert_array_equal(a, add_gaussian_noise(y, 0.3, seed=7))
    assert a.min() >= 0.0 and a.max() <= 1.0
    assert not np.array_equal(a, add_gaussian_noise(y, 0.3, seed=8))


def test_gaussian_mean_is_unbiased_on_mid_gray():
    sigma, side = 0.1, 300
    y = np.full((side, side), 0.5)
    d = add_gaussian_noise(y, sigma, seed=3) - y
    # clamping is symmetric around 0.5 and essentially never active at 5 sigma
    assert abs(d.mean()) <= 3 * sigma / np.sqrt(y.size)


def test_gaussian_negative_rejected():
    with pytest.raises(InvalidArgumentError):
        add_gaussian_noise(np.zeros((2, 2)), -0.1)


def test_salt_pepper_identity_and_full():
    y = np.random.default_rng(0).random((10, 10))
    np.testing.assert_array_equal(add_salt_pepper(y, 0.0, seed=1), y)
    full = add_salt_pepper(y, 1.0, seed=1)
    assert set(np.unique(full)) <= {0.0, 1.0}


def test_salt_pepper_exact_count():
    y = np.full((100, 100), 0.5)
    out = add_salt_pepper(y, 0.15, seed=4)
    assert int((out != y).sum()) == 1500
    assert set(np.unique(out[out != y])) == {0.0, 1.0}


def test_salt_pepper_count_bsds_size():
    # round(0.15 * 321 * 481) = round(23160.15)
    assert salt_pepper_count((321, 481), 0.15) == 23160


def test_salt_pepper_range_checked():
    with pytest.raises(InvalidArgumentError):
        add_salt_pepper(np.zeros((2, 2)), 1.5)


@given(st.floats(0, 1), st.integers(0, 2**16))
def test_noise_stays_in_unit_interval(level, seed):
    y = np.random.default_rng(seed).random((6, 7))
    for out in (add_gaussian_noise(y, level, seed=seed), add_salt_pepper(y, level, seed=seed)):
        assert out.min() >= 0.0 and out.max() <= 1.0


# -- overlay ------------------------------------------------------------------


def _red(raw):
    return np.all(raw.data == (255, 0, 0), axis=2)


def test_overlay_single_segment_has_no_red():
    y = np.full((4, 4), 0.5)
    assert not _red(render_overlay(y, np.zeros((4, 4), int))).any()


def test_overlay_vertical_split_paints_column_pair():
    labels = np.zeros((4, 6), int)
    labels[:, 3:] = 1
    red = _red(render_overlay(np.zeros((4, 6)), labels))
    assert red[:, [2, 3]].all() and red.sum() == 8


def test_overlay_checkerboard_all_red():
    ii, jj = np.mgrid[0:5, 0:5]
    assert _red(render_overlay(np.zeros((5, 5)), (ii + jj) % 2)).all()


def test_overlay_shape_mismatch():
    with pytest.raises(InvalidArgumentError):
        render_overlay(np.zeros((2, 2)), np.zeros((2, 3), int))


def test_boundary_mask_two_sided():
    labels = np.array([[0, 0, 1]])
    assert boundary_mask(labels).tolist() == [[False, True, True]]
