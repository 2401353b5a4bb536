"""
Environment-driven settings.

Values are read once at import time; a local `.env` is honoured when
python-dotenv is installed.
"""
import os

try:
    from dotenv import load_dotenv
    load_dotenv()
except Exception:
    # dotenv is optional; plain environment variables still work
    pass

THREADS = max(1, int(os.getenv("ICLUST_THREADS", "1")))
SEED = int(os.getenv("ICLUST_SEED", "20170101"))
SMALL_THRESHOLD = int(os.getenv("ICLUST_SMALL_THRESHOLD", "10"))
LOG_LEVEL = os.getenv("ICLUST_LOG_LEVEL", "WARNING").upper()
DATA_DIR = os.getenv("ICLUST_DATA_DIR", "./data")

# Algorithm defaults
DEFAULT_CV = "cv1"
DEFAULT_Q_MAX = 5
DEFAULT_K_INIT = "log10"
DEFAULT_INIT = "ward"
MAD_SCALE = 1.4826
CV_MULTIPLIER = 2.0
KMEANS_MAX_ITER = 100

UNLABELED = "__unlabeled__"


def provenance() -> str:
    return (f"cv={DEFAULT_CV}, q_max={DEFAULT_Q_MAX}, "
            f"k_init=ceil(10*ln n), init={DEFAULT_INIT}, "
            f"mad_scale={MAD_SCALE}, rng=numpy PCG64")
