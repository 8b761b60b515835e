import pytest

from src.config import (
    DEFAULT_SEARCH_SPACE, PipelineConfig, load_config_file, resolve_config, search_space_from,
)
from src.errors import ConfigOutOfRangeError, DatasetIOError, FormatError, InvalidParamsError


def test_defaults_are_valid():
    cfg = PipelineConfig().validate()
    assert cfg.ctype in ("sorting_based", "k_means")


@pytest.mark.parametrize("field,value", [("rt", 0.0), ("rt", -1.0), ("ct", 0.0), ("wsize", 0), ("wstep", 0),
                                         ("csize", 0), ("tsize", 0.0), ("tsize", 1.0), ("ctype", "dbscan")])
def test_invalid_values(field, value):
    with pytest.raises(InvalidParamsError):
        resolve_config(overrides={field: value}).validate(allow_out_of_range=True)


def test_out_of_range_needs_override():
    cfg = resolve_config(overrides={"wsize": 1})
    with pytest.raises(ConfigOutOfRangeError) as exc:
        cfg.validate()
    assert exc.value.exit_code == 3
    assert cfg.validate(allow_out_of_range=True).wsize == 1


def test_inactive_knob_is_not_range_checked():
    cfg = resolve_config(overrides={"ctype": "k_means", "ct": 5.0, "csize": 3})
    assert cfg.validate().csize == 3
    assert "ct" not in cfg.hyperparameters()
    assert cfg.clustering_params() == {"csize": 3, "seed": cfg.seed}


def test_flags_override_file_and_none_is_ignored():
    doc = {"pipeline": {"rt": 0.3, "wsize": 5}}
    cfg = resolve_config(doc, {"rt": 0.5, "wsize": None})
    assert cfg.rt == 0.5
    assert cfg.wsize == 5


def test_unknown_pipeline_key():
    with pytest.raises(InvalidParamsError):
        resolve_config({"pipeline": {"window": 3}})


def test_load_config_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('[pipeline]\nrt = 0.05\nctype = "k_means"\n\n[search]\nwsize = [3, 5]\n', encoding="utf-8")
    doc = load_config_file(str(path))
    assert resolve_config(doc).ctype == "k_means"
    space = search_space_from(doc, {"rt": [0.1]})
    assert space["wsize"] == (3, 5)
    assert space["rt"] == (0.1,)
    assert space["tsize"] == DEFAULT_SEARCH_SPACE["tsize"]


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[pipeline\nrt = ", encoding="utf-8")
    with pytest.raises(FormatError):
        load_config_file(str(bad))
    with pytest.raises(DatasetIOError):
        load_config_file(str(tmp_path / "missing.toml"))
