from copy import deepcopy
from typing import Any, ClassVar, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, create_model

OverridableModelT = TypeVar("OverridableModelT", bound="OverridableModel")


class OverridableModel(BaseModel):
    """
    Model with a generated all-optional `Overrides` counterpart.

    Defaults come from process settings via `from_settings`; an experiment file
    supplies an `Overrides` instance carrying only the keys it sets.
    """
    Overrides: ClassVar[Type[BaseModel]]
    # Settings fields are named settings_prefix + field name
    settings_prefix: ClassVar[str] = ""

    def overrided(self: OverridableModelT, overrides_instance: Optional[BaseModel]) -> OverridableModelT:
        """Return a copy with every non-None override applied and re-validated."""
        if not overrides_instance:
            return self
        merged = self.model_dump()
        merged.update(overrides_instance.model_dump(exclude_none=True))
        return type(self)(**merged)

    @classmethod
    def from_settings(cls: Type[OverridableModelT], settings: BaseModel) -> OverridableModelT:
        values = {
            name: getattr(settings, cls.settings_prefix + name)
            for name in cls.model_fields
            if hasattr(settings, cls.settings_prefix + name)
        }
        return cls(**values)

    @classmethod
    def __pydantic_init_subclass__(cls, **kwargs):
        super().__pydantic_init_subclass__(**kwargs)
        cls.Overrides = cls._create_optional_counterpart()

    @classmethod
    def _create_optional_counterpart(cls) -> Type[BaseModel]:
        fields: dict[str, Any] = {}
        for name, field_info in cls.model_fields.items():
            optional_info = deepcopy(field_info)
            optional_info.default = None
            optional_info.annotation = Optional[field_info.annotation]
            fields[name] = (optional_info.annotation, optional_info)
        return create_model(f"{cls.__name__}Overrides", __config__=ConfigDict(extra="forbid"), **fields)
