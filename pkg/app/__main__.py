"""Console entry point: ``python -m app eval|render|selfcheck|cost``."""
from flask.cli import FlaskGroup

from app import create_app


cli = FlaskGroup(
    create_app=lambda: create_app("production"),
    load_dotenv=False,
    add_default_commands=False,
    help="BitCanvas: certified bit-model reals and set rendering.",
)


if __name__ == "__main__":
    cli(prog_name="bitcanvas")
