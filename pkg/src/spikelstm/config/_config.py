"""Config class containing all configs, can be used with:

```
from spikelstm.config import CFG
CFG.<variable you want>
```

To update the config:

```
load_config('spikelstm.yaml')
```
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Optional, Union

from pydantic_yaml import parse_yaml_raw_as, to_yaml_str

from ._schema_root import ConfigModel

DEFAULT_CONFIG = 'spikelstm.yaml'


class Config(ConfigModel):

    @staticmethod
    def _update_global_config(cfg: Config):
        CFG.__dict__.update(cfg.__dict__)

    @classmethod
    def from_dict(cls, mapping: dict) -> Config:
        """Parse config from dictionary and update global config (CFG)."""
        cfg = cls.model_validate(mapping)
        cls._update_global_config(cfg)
        return cfg

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> Config:
        """Read config from file and update global config (CFG).

        Parameters
        ----------
        path : Union[str, Path]
            Path to config.

        Returns
        -------
        cfg : Config
            Return instance of Config class.
        """
        with open(path) as f:
            cfg = parse_yaml_raw_as(cls, f)

        cls._update_global_config(cfg)

        for obj in (CFG, cfg):
            obj._path = path

        return cfg

    def to_yaml(self, path: Optional[Union[str, Path]] = None) -> str:
        """Serialize to YAML, and write to `path` if given."""
        text = to_yaml_str(self)
        if path is not None:
            Path(path).write_text(text)
        return text


def load_config(path: Union[str, Path]) -> Config:
    return Config.from_file(path)


def apply_overrides(cfg: Config, **overrides: Any) -> Config:
    """Return a validated copy of `cfg` with command line overrides applied.

    Recognized keys are `seed`, `iterations`, `checkpoint`, `metrics`,
    `alpha1` and `alpha2`; None values are ignored.
    """
    locations = {
        'seed': ('training', 'seed'),
        'iterations': ('training', 'iterations'),
        'checkpoint': ('outputs', 'checkpoint'),
        'metrics': ('outputs', 'metrics'),
        'alpha1': ('surrogate', 'alpha1'),
        'alpha2': ('surrogate', 'alpha2'),
    }

    data = cfg.model_dump()
    for key, value in overrides.items():
        if value is None:
            continue
        section, field = locations[key]
        data[section][field] = value

    new = Config.from_dict(data)
    new._path = cfg._path
    CFG._path = cfg._path
    return new


CFG = Config.model_construct()
