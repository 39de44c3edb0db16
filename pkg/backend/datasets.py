"""
Jeux de données : MNIST réduit à 7×7 (fichiers IDX) et cercles concentriques
"""

import gzip
import logging
import os
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import httpx
import numpy as np
import pandas as pd
from sklearn.datasets import make_circles as sk_make_circles
from sklearn.model_selection import train_test_split

from config import Config
from .errors import ConfigurationError, DatasetFormatError

logger = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
POOL = 4

MNIST_MIRROR = 'https://storage.googleapis.com/cvdf-datasets/mnist/'
MNIST_FILES = {
    'train_images': 'train-images-idx3-ubyte.gz',
    'train_labels': 'train-labels-idx1-ubyte.gz',
    'test_images': 't10k-images-idx3-ubyte.gz',
    'test_labels': 't10k-labels-idx1-ubyte.gz',
}


@dataclass(frozen=True)
class Dataset:
    """Échantillons (une ligne par échantillon) et indices de classe"""
    inputs: np.ndarray
    labels: np.ndarray
    num_classes: int
    name: str = 'dataset'
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.inputs.shape[0] != self.labels.shape[0]:
            raise ConfigurationError(
                f"{self.inputs.shape[0]} entrées pour {self.labels.shape[0]} étiquettes"
            )
        self.inputs.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.inputs.shape[1])

    def targets(self) -> np.ndarray:
        """Cibles one-hot, une ligne par échantillon"""
        return np.eye(self.num_classes)[self.labels]

    def subset(self, indices: Sequence[int]) -> 'Dataset':
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.inputs[indices], self.labels[indices], self.num_classes,
                       self.name, dict(self.metadata))

    def split(self, test_size, seed: int) -> Tuple['Dataset', 'Dataset']:
        """Découpage apprentissage/test stratifié, déterministe pour une graine donnée"""
        train_idx, test_idx = train_test_split(
            np.arange(len(self)), test_size=test_size, random_state=seed,
            stratify=self.labels,
        )
        return self.subset(train_idx), self.subset(test_idx)


def one_hot(label: int, num_classes: int) -> np.ndarray:
    """Vecteur de base e_label de dimension num_classes"""
    if not 0 <= int(label) < num_classes:
        raise ConfigurationError(f"Étiquette {label} hors de [0, {num_classes})")
    target = np.zeros(num_classes)
    target[int(label)] = 1.0
    return target


# ============================================================================
# MNIST (FORMAT IDX)
# ============================================================================

def _read_bytes(path: str) -> bytes:
    if not os.path.exists(path):
        raise DatasetFormatError("Fichier introuvable", path)
    opener = gzip.open if str(path).endswith('.gz') else open
    with opener(path, 'rb') as handle:
        return handle.read()


def pool_4x4(images: np.ndarray) -> np.ndarray:
    """Moyenne sur des fenêtres 4×4 disjointes ; (n, 28, 28) -> (n, 7, 7)"""
    n, rows, cols = images.shape
    return images.reshape(n, rows // POOL, POOL, cols // POOL, POOL).mean(axis=(2, 4))


def parse_idx_images(data: bytes, path: str = None) -> np.ndarray:
    """Décode un fichier IDX d'images ; retourne un tableau uint8 (n, lignes, colonnes)"""
    if len(data) < 16:
        raise DatasetFormatError("En-tête IDX tronqué", path, len(data))
    magic, count, rows, cols = struct.unpack('>IIII', data[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise DatasetFormatError(f"Nombre magique inattendu 0x{magic:08x} pour des images", path, 0)
    if rows % POOL or cols % POOL:
        raise DatasetFormatError(f"Dimensions {rows}x{cols} non divisibles par {POOL}", path, 8)
    expected = 16 + count * rows * cols
    if len(data) < expected:
        raise DatasetFormatError(
            f"Fichier tronqué : {count} images annoncées, {len(data)} octets sur {expected}",
            path, len(data),
        )
    return np.frombuffer(data, dtype=np.uint8, count=count * rows * cols, offset=16) \
        .reshape(count, rows, cols)


def parse_idx_labels(data: bytes, path: str = None) -> np.ndarray:
    """Décode un fichier IDX d'étiquettes"""
    if len(data) < 8:
        raise DatasetFormatError("En-tête IDX tronqué", path, len(data))
    magic, count = struct.unpack('>II', data[:8])
    if magic != IDX_LABELS_MAGIC:
        raise DatasetFormatError(f"Nombre magique inattendu 0x{magic:08x} pour des étiquettes", path, 0)
    if len(data) < 8 + count:
        raise DatasetFormatError(
            f"Fichier tronqué : {count} étiquettes annoncées", path, len(data)
        )
    labels = np.frombuffer(data, dtype=np.uint8, count=count, offset=8)
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        raise DatasetFormatError(f"Étiquette {labels[bad[0]]} hors de 0..9", path, 8 + int(bad[0]))
    return labels


def load_mnist_7x7(idx_image_path: str, idx_label_path: str,
                   limit: Optional[int] = None) -> Dataset:
    """
    Charge MNIST et réduit chaque image à 7×7 par moyenne 4×4

    Les pixels sont ramenés dans [0, 1] avant la réduction.

    Args:
        idx_image_path: Fichier IDX des images (éventuellement .gz)
        idx_label_path: Fichier IDX des étiquettes (éventuellement .gz)
        limit: Nombre maximal d'images à garder (dans l'ordre du fichier)

    Returns:
        Dataset de vecteurs à 49 composantes
    """
    images = parse_idx_images(_read_bytes(idx_image_path), idx_image_path)
    labels = parse_idx_labels(_read_bytes(idx_label_path), idx_label_path)
    if images.shape[0] != labels.shape[0]:
        raise DatasetFormatError(
            f"{images.shape[0]} images pour {labels.shape[0]} étiquettes", idx_label_path, 4
        )
    if limit is not None:
        images, labels = images[:limit], labels[:limit]

    pooled = pool_4x4(images.astype(float) / 255.0)
    logger.info("✅ MNIST chargé : %d images réduites à %dx%d",
                pooled.shape[0], pooled.shape[1], pooled.shape[2])
    return Dataset(
        inputs=pooled.reshape(pooled.shape[0], -1),
        labels=labels.astype(int),
        num_classes=10,
        name='mnist7x7',
        metadata={'source': os.path.basename(str(idx_image_path))},
    )


def fetch_mnist(dest: str = None, base_url: str = MNIST_MIRROR, timeout: float = 60.0) -> Dict[str, Any]:
    """
    Télécharge les quatre fichiers IDX compressés dans `dest`

    Returns:
        Dictionnaire {'success', 'path', 'files', 'message'}
    """
    dest = dest or Config.MNIST_DIR
    os.makedirs(dest, exist_ok=True)
    files = {}
    try:
        with httpx.Client(timeout=timeout, follow_redirects=True) as client:
            for key, name in MNIST_FILES.items():
                target = os.path.join(dest, name)
                if os.path.exists(target):
                    files[key] = target
                    continue
                logger.info("⬇️ Téléchargement de %s", name)
                with client.stream('GET', base_url + name) as response:
                    response.raise_for_status()
                    with open(target + '.part', 'wb') as out:
                        for chunk in response.iter_bytes():
                            out.write(chunk)
                os.replace(target + '.part', target)
                files[key] = target
    except httpx.HTTPError as e:
        logger.error("❌ Téléchargement MNIST impossible : %s", e)
        return {'success': False, 'path': dest, 'files': files,
                'message': f"Erreur de téléchargement : {e}"}

    return {'success': True, 'path': dest, 'files': files,
            'message': f"{len(files)} fichiers MNIST disponibles dans {dest}"}


def load_mnist_split(mnist_dir: str = None, train_limit: Optional[int] = None,
                     test_limit: Optional[int] = None) -> Tuple[Dataset, Dataset]:
    """Charge les parties apprentissage et test depuis un dossier (noms standard, .gz ou non)"""
    mnist_dir = mnist_dir or Config.MNIST_DIR

    def locate(name: str) -> str:
        for candidate in (name, name[:-3]):
            path = os.path.join(mnist_dir, candidate)
            if os.path.exists(path):
                return path
        return os.path.join(mnist_dir, name)

    train = load_mnist_7x7(locate(MNIST_FILES['train_images']),
                           locate(MNIST_FILES['train_labels']), train_limit)
    test = load_mnist_7x7(locate(MNIST_FILES['test_images']),
                          locate(MNIST_FILES['test_labels']), test_limit)
    return train, test


# ============================================================================
# CERCLES CONCENTRIQUES
# ============================================================================

def make_circles(n: int, noise_std: float = Config.CIRCLES_NOISE,
                 radius_factor: float = Config.CIRCLES_FACTOR, seed: int = 0) -> Dataset:
    """
    Deux cercles concentriques : n/2 points sur le cercle unité (classe 0),
    n/2 sur le cercle de rayon `radius_factor` (classe 1), bruit gaussien sur
    les coordonnées. Déterministe pour une graine donnée.
    """
    if n <= 0 or n % 2:
        raise ConfigurationError(f"Le nombre de points doit être pair et positif (reçu {n})")
    if not 0 < radius_factor < 1:
        raise ConfigurationError(f"Le rapport des rayons doit être dans ]0, 1[ (reçu {radius_factor})")
    if noise_std < 0:
        raise ConfigurationError("L'écart-type du bruit doit être positif")

    inputs, labels = sk_make_circles(
        n_samples=n, shuffle=True, noise=noise_std or None,
        random_state=seed, factor=radius_factor,
    )
    return Dataset(
        inputs=np.asarray(inputs, dtype=float),
        labels=np.asarray(labels, dtype=int),
        num_classes=2,
        name='circles',
        metadata={'noise_std': noise_std, 'radius_factor': radius_factor, 'seed': seed},
    )


def make_circles_split(n_train: int = Config.CIRCLES_TRAIN, n_test: int = Config.CIRCLES_TEST,
                       noise_std: float = Config.CIRCLES_NOISE,
                       radius_factor: float = Config.CIRCLES_FACTOR,
                       seed: int = 0) -> Tuple[Dataset, Dataset]:
    """Génère n_train + n_test points puis les sépare (stratifié)"""
    full = make_circles(n_train + n_test, noise_std, radius_factor, seed)
    return full.split(n_test, seed)


def save_circles_csv(dataset: Dataset, path: str) -> Dict[str, Any]:
    """Écrit un jeu de cercles en CSV (colonnes x, y, label)"""
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    frame = pd.DataFrame({'x': dataset.inputs[:, 0], 'y': dataset.inputs[:, 1],
                          'label': dataset.labels})
    frame.to_csv(path, index=False)
    return {'success': True, 'path': path, 'file_size': os.path.getsize(path)}


def load_circles_csv(path: str) -> Dataset:
    """Relit un jeu de cercles écrit par `save_circles_csv`"""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise DatasetFormatError(f"CSV illisible ({e})", path) from e
    missing = {'x', 'y', 'label'} - set(frame.columns)
    if missing:
        raise DatasetFormatError(f"Colonnes manquantes : {', '.join(sorted(missing))}", path)
    return Dataset(frame[['x', 'y']].to_numpy(dtype=float), frame['label'].to_numpy(dtype=int),
                   2, 'circles', {'cache': path})
