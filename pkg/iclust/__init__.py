# marks package
__all__ = [
    "config", "errors", "log", "schemas",
    "data", "neighbors", "lof", "initcluster", "merge", "evaluation",
    "pipeline", "bench", "cli",
]

__version__ = "1.0.0"
