import logging

from helpers.errors import ParameterError

logger = logging.getLogger(__name__)


class ExtractorRegistry:
    def __init__(self):
        self._extractors = {}

    def register(self, name):
        """Decorator que registra um extrator de tuplas por nome."""

        def decorator(func):
            self._extractors[name] = func
            return func

        return decorator

    def names(self):
        return sorted(self._extractors)

    def execute(self, name, word, epsilon, k):
        """Executa o extrator `name` sobre um fator já verificado como regular."""
        extractor = self._extractors.get(name)
        if not extractor:
            logger.error(f"Extrator desconhecido: {name}")
            raise ParameterError(f"Extractor '{name}' not implemented. Known: {', '.join(self.names())}")

        logger.debug(f"Executando extrator {name}: m={len(word)} eps={epsilon} k={k}")
        return extractor(word, epsilon, k)


# Instância global do registro
registry = ExtractorRegistry()
