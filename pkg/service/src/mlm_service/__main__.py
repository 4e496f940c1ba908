"""Run the scorer service: ``mlm-service [--config service.json]``."""

import argparse

import uvicorn

from .app import create_app
from .config import load_config


def main() -> None:
    parser = argparse.ArgumentParser(prog="mlm-service")
    parser.add_argument("--config", help="JSON config file; MLM_SERVICE_* env "
                                         "variables override its values")
    args = parser.parse_args()
    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)


if __name__ == "__main__":
    main()
