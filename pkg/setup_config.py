import json
import logging
import os
import sqlite3
from pathlib import Path
from typing import Any, Dict, List, Optional

from helpers.errors import ParameterError

logger = logging.getLogger(__name__)

CONFIG_ENV = "TWINS_CONFIG_DB"

DEFAULTS: Dict[str, Any] = {
    "epsilon": "1/10",
    "auto_epsilon_c": 1.0,
    "epsilon_floor": "1/50",
    "epsilon_cap": "1/4",
    "jobs": 0,
    "budget_seconds": None,
    "log_level": "WARNING",
    "alpha_grid_points": 100000,
    "alpha_tol": 1e-9,
}


class ConfigManager:
    """Gerenciador de configurações usando SQLite (ou memória quando não há caminho)."""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = db_path or os.getenv(CONFIG_ENV) or None
        self._memory: Dict[str, Any] = {}
        if self.db_path:
            Path(self.db_path).expanduser().parent.mkdir(parents=True, exist_ok=True)
            self._init_db()

    @property
    def persistent(self) -> bool:
        return self.db_path is not None

    def _connect(self) -> sqlite3.Connection:
        return sqlite3.connect(self.db_path)

    def _init_db(self):
        """Inicializa o banco de dados"""
        conn = self._connect()
        cursor = conn.cursor()

        # Tabela de configurações gerais
        cursor.execute('''
                       CREATE TABLE IF NOT EXISTS config
                       (
                           key TEXT PRIMARY KEY,
                           value TEXT,
                           updated_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                       )
                       ''')

        # Tabela de histórico de execuções
        cursor.execute('''
                       CREATE TABLE IF NOT EXISTS operation_history
                       (
                           id INTEGER PRIMARY KEY AUTOINCREMENT,
                           operation_type TEXT,
                           status TEXT,
                           details TEXT,
                           created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                       )
                       ''')

        conn.commit()
        conn.close()
        logger.debug("Banco de configuração inicializado em %s", self.db_path)

    def get(self, key: str, default: Any = None) -> Any:
        """Obtém uma configuração; chaves nunca gravadas caem no valor padrão."""
        fallback = DEFAULTS.get(key) if default is None else default
        if not self.persistent:
            return self._memory.get(key, fallback)
        conn = self._connect()
        cursor = conn.cursor()
        cursor.execute('SELECT value FROM config WHERE key = ?', (key,))
        result = cursor.fetchone()
        conn.close()

        if result:
            try:
                return json.loads(result[0])
            except json.JSONDecodeError:
                return result[0]
        return fallback

    def set(self, key: str, value: Any):
        """Define uma configuração"""
        if key not in DEFAULTS:
            raise ParameterError(f"Unknown configuration key {key!r}; known keys: {', '.join(sorted(DEFAULTS))}")
        if not self.persistent:
            self._memory[key] = value
            return
        conn = self._connect()
        cursor = conn.cursor()
        cursor.execute('''
            INSERT OR REPLACE INTO config (key, value, updated_at)
            VALUES (?, ?, CURRENT_TIMESTAMP)
        ''', (key, json.dumps(value)))

        conn.commit()
        conn.close()
        logger.info(f"Configuração '{key}' atualizada")

    def all(self) -> Dict[str, Any]:
        return {key: self.get(key) for key in sorted(DEFAULTS)}

    def log_operation(self, op_type: str, status: str, details: Any = ""):
        """Registra uma execução no histórico (apenas com banco configurado)."""
        if not self.persistent:
            return
        if not isinstance(details, str):
            details = json.dumps(details, sort_keys=True, default=str)
        conn = self._connect()
        cursor = conn.cursor()
        cursor.execute('''
                       INSERT INTO operation_history (operation_type, status, details)
                       VALUES (?, ?, ?)
                       ''', (op_type, status, details))
        conn.commit()
        conn.close()

    def get_operations(self, limit: int = 50) -> List[Dict]:
        """Obtém histórico de execuções, mais recentes primeiro"""
        if not self.persistent:
            return []
        conn = self._connect()
        conn.row_factory = sqlite3.Row
        cursor = conn.cursor()
        cursor.execute('''
                       SELECT *
                       FROM operation_history
                       ORDER BY id DESC LIMIT ?
                       ''', (limit,))
        results = [dict(row) for row in cursor.fetchall()]
        conn.close()
        return results

    def delete_operation(self, op_id: int):
        """Deleta uma execução do histórico"""
        if not self.persistent:
            return
        conn = self._connect()
        cursor = conn.cursor()
        cursor.execute('DELETE FROM operation_history WHERE id = ?', (op_id,))
        conn.commit()
        conn.close()
        logger.info(f"Operação id={op_id} deletada")

    def clear_operations(self) -> int:
        if not self.persistent:
            return 0
        conn = self._connect()
        cursor = conn.cursor()
        cursor.execute('DELETE FROM operation_history')
        removed = cursor.rowcount
        conn.commit()
        conn.close()
        logger.info("Histórico limpo (%d registros)", removed)
        return removed
