import gzip
import struct

import numpy as np
import pytest

from backend.datasets import (Dataset, load_circles_csv, load_mnist_7x7, make_circles, one_hot,
                              parse_idx_images, parse_idx_labels, pool_4x4, save_circles_csv)
from backend.errors import ConfigurationError, DatasetFormatError


def idx_images(images: np.ndarray) -> bytes:
    n, rows, cols = images.shape
    return struct.pack('>IIII', 0x00000803, n, rows, cols) + images.astype(np.uint8).tobytes()


def idx_labels(labels) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack('>II', 0x00000801, labels.size) + labels.tobytes()


@pytest.fixture
def mnist_files(tmp_path):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(6, 28, 28))
    labels = [3, 1, 4, 1, 5, 9]
    img_path = tmp_path / 'images-idx3-ubyte'
    lbl_path = tmp_path / 'labels-idx1-ubyte.gz'
    img_path.write_bytes(idx_images(images))
    with gzip.open(lbl_path, 'wb') as handle:
        handle.write(idx_labels(labels))
    return images, labels, str(img_path), str(lbl_path)


# ============================================================================
# MNIST
# ============================================================================

def test_zero_image_pools_to_zeros(tmp_path):
    img = tmp_path / 'img'
    lbl = tmp_path / 'lbl'
    img.write_bytes(idx_images(np.zeros((1, 28, 28))))
    lbl.write_bytes(idx_labels([0]))
    dataset = load_mnist_7x7(str(img), str(lbl))
    assert dataset.inputs.shape == (1, 49)
    np.testing.assert_array_equal(dataset.inputs, 0.0)


def test_single_bright_pixel_lands_in_one_cell(tmp_path):
    image = np.zeros((1, 28, 28))
    image[0, 5, 9] = 255
    img = tmp_path / 'img'
    lbl = tmp_path / 'lbl'
    img.write_bytes(idx_images(image))
    lbl.write_bytes(idx_labels([7]))
    pooled = load_mnist_7x7(str(img), str(lbl)).inputs.reshape(7, 7)
    assert pooled[1, 2] == pytest.approx(1.0 / 16)
    assert np.count_nonzero(pooled) == 1


def test_pooling_matches_brute_force_and_preserves_mean(mnist_files):
    images, labels, img_path, lbl_path = mnist_files
    dataset = load_mnist_7x7(img_path, lbl_path)
    scaled = images / 255.0
    for n in range(images.shape[0]):
        expected = np.array([[scaled[n, 4 * r:4 * r + 4, 4 * c:4 * c + 4].mean() for c in range(7)]
                             for r in range(7)])
        np.testing.assert_allclose(dataset.inputs[n].reshape(7, 7), expected, atol=1e-12)
        assert dataset.inputs[n].mean() == pytest.approx(scaled[n].mean())
    np.testing.assert_array_equal(dataset.labels, labels)
    assert dataset.num_classes == 10
    assert dataset.inputs.min() >= 0.0 and dataset.inputs.max() <= 1.0


def test_limit_keeps_file_order(mnist_files):
    _, labels, img_path, lbl_path = mnist_files
    dataset = load_mnist_7x7(img_path, lbl_path, limit=3)
    assert len(dataset) == 3
    np.testing.assert_array_equal(dataset.labels, labels[:3])


def test_pool_shape():
    assert pool_4x4(np.ones((2, 28, 28))).shape == (2, 7, 7)


def test_bad_magic_reports_offset_zero():
    data = struct.pack('>IIII', 0x00000801, 1, 28, 28) + bytes(784)
    with pytest.raises(DatasetFormatError) as info:
        parse_idx_images(data, 'x')
    assert info.value.offset == 0


def test_truncated_images_report_length():
    data = idx_images(np.zeros((2, 28, 28)))[:-10]
    with pytest.raises(DatasetFormatError) as info:
        parse_idx_images(data)
    assert info.value.offset == len(data)


def test_out_of_range_label_reports_its_offset():
    with pytest.raises(DatasetFormatError) as info:
        parse_idx_labels(idx_labels([1, 2, 12, 3]))
    assert info.value.offset == 8 + 2


def test_count_mismatch_rejected(tmp_path):
    img = tmp_path / 'img'
    lbl = tmp_path / 'lbl'
    img.write_bytes(idx_images(np.zeros((2, 28, 28))))
    lbl.write_bytes(idx_labels([0, 1, 2]))
    with pytest.raises(DatasetFormatError):
        load_mnist_7x7(str(img), str(lbl))


def test_missing_file_rejected(tmp_path):
    with pytest.raises(DatasetFormatError):
        load_mnist_7x7(str(tmp_path / 'absent'), str(tmp_path / 'absent'))


# ============================================================================
# CERCLES
# ============================================================================

def test_noiseless_circles_have_exact_radii():
    dataset = make_circles(200, noise_std=0.0, seed=1)
    radii = np.linalg.norm(dataset.inputs, axis=1)
    np.testing.assert_allclose(radii[dataset.labels == 0], 1.0)
    np.testing.assert_allclose(radii[dataset.labels == 1], 0.5)
    assert np.bincount(dataset.labels).tolist() == [100, 100]


def test_noisy_circles_stay_radially_separable():
    dataset = make_circles(2000, noise_std=0.08, seed=2)
    radii = np.linalg.norm(dataset.inputs, axis=1)
    predicted = (radii < 0.75).astype(int)
    assert (predicted == dataset.labels).mean() >= 0.97


def test_circles_are_deterministic_per_seed():
    a = make_circles(100, seed=5)
    b = make_circles(100, seed=5)
    c = make_circles(100, seed=6)
    np.testing.assert_array_equal(a.inputs, b.inputs)
    assert not np.array_equal(a.inputs, c.inputs)


@pytest.mark.parametrize('kwargs', [{'n': 101}, {'n': 0}, {'n': 10, 'radius_factor': 1.0},
                                    {'n': 10, 'noise_std': -0.1}])
def test_invalid_circle_parameters(kwargs):
    with pytest.raises(ConfigurationError):
        make_circles(**kwargs)


def test_circles_csv_reload(tmp_path):
    dataset = make_circles(50, seed=3)
    result = save_circles_csv(dataset, str(tmp_path / 'cache' / 'circles.csv'))
    assert result['success'] and result['file_size'] > 0
    reloaded = load_circles_csv(result['path'])
    np.testing.assert_allclose(reloaded.inputs, dataset.inputs)
    np.testing.assert_array_equal(reloaded.labels, dataset.labels)


def test_circles_csv_missing_columns(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('x,label\n0.1,0\n')
    with pytest.raises(DatasetFormatError):
        load_circles_csv(str(path))


# ============================================================================
# UTILITAIRES
# ============================================================================

def test_one_hot():
    np.testing.assert_array_equal(one_hot(2, 4), [0, 0, 1, 0])
    with pytest.raises(ConfigurationError):
        one_hot(4, 4)


def test_split_is_deterministic_and_stratified():
    dataset = make_circles(100, seed=4)
    train_a, test_a = dataset.split(20, seed=9)
    train_b, test_b = dataset.split(20, seed=9)
    np.testing.assert_array_equal(test_a.inputs, test_b.inputs)
    assert len(train_a) == 80 and len(test_a) == 20
    assert np.bincount(test_a.labels).tolist() == [10, 10]


def test_dataset_is_immutable_and_consistent():
    dataset = Dataset(np.zeros((3, 2)), np.array([0, 1, 0]), 2)
    with pytest.raises(ValueError):
        dataset.inputs[0, 0] = 1.0
    np.testing.assert_array_equal(dataset.targets(), [[1, 0], [0, 1], [1, 0]])
    with pytest.raises(ConfigurationError):
        Dataset(np.zeros((3, 2)), np.array([0, 1]), 2)
