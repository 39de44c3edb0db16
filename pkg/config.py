"""
Configuration de l'application
"""

import logging
import os

from dotenv import load_dotenv

# Charger un éventuel fichier .env local avant de lire l'environnement
load_dotenv()


class Config:
    """Configuration de base"""

    # Constantes de temps (secondes)
    TAU_PROP = 0.010
    TAU_PLAS = 10.0
    TAU_DEC = 1200.0
    SAMPLE_TIME = 0.050
    BUFFER_TIME_MAX = 0.005  # buffer = min(T/10, 5 ms)

    # Initialisation
    V_INIT = 0.1

    # Solveur (tolérances des expériences)
    SOLVER_RTOL = 2e-3
    SOLVER_ATOL = 1e-5
    SOLVER_DT_INIT = 1e-4
    SOLVER_DT_MIN = 1e-10
    SOLVER_DT_MAX = 0.1
    SOLVER_SAFETY = 0.9
    SOLVER_MAX_STEPS = 5_000_000

    # Protocole d'évaluation
    MOVING_AVERAGE_WINDOW = 100
    CHECKPOINT_EVERY = 50
    EVAL_EVERY = 1000
    TEST_SIZE = 500

    # Jeu de données « circles »
    CIRCLES_FACTOR = 0.5
    CIRCLES_NOISE = 0.08
    CIRCLES_TRAIN = 2000
    CIRCLES_TEST = 500

    # Chemins des fichiers
    MNIST_DIR = os.environ.get('CTNET_MNIST_DIR', 'data/mnist')
    OUTPUT_DIR = os.environ.get('CTNET_OUTPUT_DIR', 'runs')
    CACHE_DIR = os.environ.get('CTNET_CACHE_DIR', 'data/cache')

    # Exécution
    WORKERS = int(os.environ.get('CTNET_WORKERS', os.cpu_count() or 1))
    LOG_LEVEL = os.environ.get('CTNET_LOG_LEVEL', 'INFO')
    SHOW_PROGRESS = True

    @classmethod
    def init_app(cls, output_dir: str = None):
        """Initialise l'environnement d'exécution (dossiers et journalisation)"""
        for folder in [output_dir or cls.OUTPUT_DIR, cls.CACHE_DIR]:
            if not os.path.exists(folder):
                os.makedirs(folder)

        logging.basicConfig(
            level=getattr(logging, str(cls.LOG_LEVEL).upper(), logging.INFO),
            format='%(asctime)s %(levelname)s [%(name)s] %(message)s',
        )


class DevelopmentConfig(Config):
    """Configuration pour le développement"""
    DEBUG = True
    TESTING = False
    LOG_LEVEL = os.environ.get('CTNET_LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Configuration pour les longues campagnes de balayage"""
    DEBUG = False
    TESTING = False
    SHOW_PROGRESS = False


class TestingConfig(Config):
    """Configuration pour les tests"""
    DEBUG = False
    TESTING = True
    WORKERS = 1
    SHOW_PROGRESS = False
    LOG_LEVEL = 'WARNING'


# Mapping des configurations
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name: str = None):
    """Retourne la classe de configuration du profil demandé (ou de CTNET_ENV)"""
    name = name or os.environ.get('CTNET_ENV', 'default')
    return config.get(name, config['default'])
