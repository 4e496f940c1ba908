"""Config file parsing and environment overrides."""

import json

import pytest

from mlm_service.config import ServiceConfig, load_config


def test_defaults():
    config = load_config(env={})
    assert config.model_name == "distilbert-base-uncased"
    assert config.oov_policy == "subtokens"


def test_config_file(tmp_path):
    path = tmp_path / "service.json"
    path.write_text(json.dumps({"model_name": "x", "port": 9000}))
    config = load_config(str(path), env={})
    assert config.model_name == "x"
    assert config.port == 9000


def test_env_overrides_file(tmp_path):
    path = tmp_path / "service.json"
    path.write_text(json.dumps({"model_name": "from-file", "port": 9000}))
    env = {"MLM_SERVICE_MODEL_NAME": "from-env", "MLM_SERVICE_MAX_LENGTH": "32"}
    config = load_config(str(path), env=env)
    assert config.model_name == "from-env"
    assert config.port == 9000
    assert config.max_length == 32


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "service.json"
    path.write_text(json.dumps({"nope": 1}))
    with pytest.raises(ValueError, match="unknown config keys"):
        load_config(str(path), env={})


def test_invalid_values_rejected():
    with pytest.raises(ValueError):
        ServiceConfig(max_length=2)
    with pytest.raises(ValueError):
        ServiceConfig(oov_policy="drop")
