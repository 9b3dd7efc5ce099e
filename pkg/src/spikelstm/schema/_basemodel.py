from __future__ import annotations

from pydantic import BaseModel as PydanticBaseModel
from pydantic import ConfigDict


class BaseModel(PydanticBaseModel):
    """Base model for all configuration sections.

    Unknown keys are rejected, so a typo in `spikelstm.yaml` is reported
    instead of silently falling back to a default.
    """

    model_config = ConfigDict(extra='forbid')
