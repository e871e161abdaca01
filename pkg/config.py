import os


class Config:
    LOG_LEVEL = "INFO"

    RATELIMIT_DEFAULT = "100 per hour"
    RATELIMIT_STORAGE_URI = os.environ.get("RATELIMIT_STORAGE_URI", "memory://")
    PROPAGATE_EXCEPTIONS = True

    DIVISION_MAX_PROBE = 64

    # escape-time certification
    WORKING_PRECISION_EXTRA = 20
    MANDEL_T_PER_N = 64
    JULIA_A = 8
    JULIA_B = 32
    SUBDIVISION_BUDGET = 64
    CYCLE_WINDOW = 32
    BLOWUP_WIDTH = "8"

    GRAPH_SAMPLE_BUDGET = 200_000
    KOCH_MAX_LEVEL = 12

    RENDER_WORKERS = 4
    AUDIT_SAMPLES = 100
    # keep a pixel when its approximate distance is below PIXEL_THRESHOLD * 2^-n
    PIXEL_THRESHOLD = "3/2^1"


class DevelopmentConfig(Config):
    DEBUG = True
    LOG_LEVEL = "DEBUG"


class TestingConfig(Config):
    TESTING = True
    RATELIMIT_ENABLED = False
    RENDER_WORKERS = 1
    AUDIT_SAMPLES = 10
    LOG_LEVEL = "WARNING"


class ProductionConfig(Config):
    pass
