"""
Écriture des résultats : record.json, tables CSV, état final
"""

import logging
import os
from typing import Any, Dict, Sequence

import msgspec
import numpy as np
import pandas as pd

from .state import NetworkState, StateLayout

logger = logging.getLogger(__name__)


class RecordWriter:
    """Écrit les artefacts d'une expérience dans un dossier de sortie"""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)

    def _result(self, path: str, message: str) -> Dict[str, Any]:
        size = os.path.getsize(path)
        logger.info("✅ %s : %s (%d octets)", message, path, size)
        return {'success': True, 'path': path, 'file_size': size, 'message': message}

    def write_record(self, record, filename: str = 'record.json') -> Dict[str, Any]:
        """Enregistrement(s) msgspec encodé(s) en JSON"""
        path = os.path.join(self.output_dir, filename)
        try:
            payload = msgspec.json.encode(record)
            with open(path, 'wb') as handle:
                handle.write(msgspec.json.format(payload, indent=2))
        except (OSError, TypeError) as e:
            logger.error("❌ Écriture de %s impossible : %s", path, e)
            return {'success': False, 'path': path, 'file_size': 0, 'message': str(e)}
        return self._result(path, "Enregistrement écrit")

    def write_records(self, records: Sequence, filename: str = 'records.json') -> Dict[str, Any]:
        return self.write_record(list(records), filename)

    def write_table(self, table: pd.DataFrame, filename: str) -> Dict[str, Any]:
        path = os.path.join(self.output_dir, filename)
        try:
            table.to_csv(path, index=False)
        except OSError as e:
            logger.error("❌ Écriture de %s impossible : %s", path, e)
            return {'success': False, 'path': path, 'file_size': 0, 'message': str(e)}
        return self._result(path, f"Table écrite ({len(table)} lignes)")

    def write_json_table(self, table: pd.DataFrame, filename: str) -> Dict[str, Any]:
        path = os.path.join(self.output_dir, filename)
        table.to_json(path, orient='records', indent=2)
        return self._result(path, "Table JSON écrite")

    def write_state(self, state: NetworkState, filename: str = 'state.npz') -> Dict[str, Any]:
        """État final : vecteur plat, temps et formes pour relecture"""
        path = os.path.join(self.output_dir, filename)
        layout = state.layout
        np.savez(path, state=state.flatten(), t=state.t,
                 z_shapes=np.array([s[0] for s in layout.z_shapes]),
                 w_shapes=np.array(layout.w_shapes), v_shapes=np.array(layout.v_shapes))
        return self._result(path, "État final écrit")


def load_state(path: str) -> NetworkState:
    """Relit un état écrit par `RecordWriter.write_state`"""
    with np.load(path) as data:
        layout = StateLayout(
            z_shapes=tuple((int(d),) for d in data['z_shapes']),
            w_shapes=tuple((int(a), int(b)) for a, b in data['w_shapes']),
            v_shapes=tuple((int(a), int(b)) for a, b in data['v_shapes']),
        )
        return NetworkState.unflatten(layout, data['state'], float(data['t']))
