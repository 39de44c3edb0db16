"""
Configuration pytest à la racine : rend `config`, `backend` et `presets` importables
"""

import os
import sys

os.environ.setdefault('CTNET_ENV', 'testing')
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
