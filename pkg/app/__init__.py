import logging

from flask import Flask

from config import Config, DevelopmentConfig, ProductionConfig, TestingConfig
from .extensions import limiter


CONFIG_MAP = {
    "development": DevelopmentConfig,
    "testing": TestingConfig,
    "production": ProductionConfig,
}


def create_app(config_name: str | None = None) -> Flask:
    """Application factory."""
    app = Flask(__name__)

    config_obj = CONFIG_MAP.get(config_name or "production", Config)
    app.config.from_object(config_obj)

    register_logging(app)
    register_extensions(app)
    register_blueprints(app)
    register_error_handlers(app)

    return app


def register_logging(app: Flask) -> None:
    level = logging.getLevelName(app.config["LOG_LEVEL"])
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger("app").setLevel(level)


def register_extensions(app: Flask) -> None:
    limiter.init_app(app)


def register_blueprints(app: Flask) -> None:
    from .api.routes import api_bp
    from .cli.routes import cli_bp

    app.register_blueprint(api_bp, url_prefix="/api")
    app.register_blueprint(cli_bp)


def register_error_handlers(app: Flask) -> None:
    from http import HTTPStatus

    from flask import jsonify

    from .exceptions import BitCanvasError

    @app.errorhandler(BitCanvasError)
    def library_error(error):
        return jsonify({"error": str(error), "type": type(error).__name__}), HTTPStatus.UNPROCESSABLE_ENTITY

    @app.errorhandler(404)
    def not_found(error):
        return jsonify({"error": "Not Found"}), HTTPStatus.NOT_FOUND

    @app.errorhandler(405)
    def method_not_allowed(error):
        return jsonify({"error": "Method Not Allowed"}), HTTPStatus.METHOD_NOT_ALLOWED

    @app.errorhandler(429)
    def ratelimit_handler(error):
        return jsonify({"error": getattr(error, "description", "Too Many Requests")}), HTTPStatus.TOO_MANY_REQUESTS

    @app.errorhandler(500)
    def server_error(error):
        return jsonify({"error": "Internal Server Error"}), HTTPStatus.INTERNAL_SERVER_ERROR
