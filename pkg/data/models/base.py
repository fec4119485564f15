"""
Base pydantic schema for SigScale.
"""
from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    """Base schema for all immutable domain records."""

    model_config = ConfigDict(
        frozen=True,
        from_attributes=True,
        use_enum_values=False,
        populate_by_name=True,
    )


class ArraySchema(BaseSchema):
    """Schema that carries numpy arrays or pandas frames."""

    model_config = ConfigDict(
        frozen=True,
        arbitrary_types_allowed=True,
    )
