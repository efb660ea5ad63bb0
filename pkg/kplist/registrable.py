from collections import defaultdict
from typing import Any, Callable, Dict, List, Optional, Tuple, Type

from kplist.logging import logger

Entry = Tuple[Type, Optional[Type]]


class Registrable:
    """Name-based registry shared by generators, cluster strategies and run modes.

    Each subclass hierarchy rooted at a `Registrable` keeps its own namespace; an entry maps a
    name to the implementing class and, optionally, the config dataclass it is built from.
    """

    _registry: Dict[type, Dict[str, Entry]] = defaultdict(dict)

    @classmethod
    def _entries(cls) -> Dict[str, Entry]:
        return Registrable._registry[cls]

    @classmethod
    def register(cls, name: str, config_cls: Optional[Any] = None) -> Callable:
        entries = cls._entries()

        def add_to_registry(subclass):
            known = entries.get(name)
            if known is not None:
                if known[0] is not subclass:
                    raise ValueError(
                        f"'{name}' is already taken by {known[0].__name__} in {cls.__name__}."
                    )
                return subclass

            logger.info("Registering %s: adding %s as %s", cls.__name__, subclass.__name__, name)
            entries[name] = (subclass, config_cls)
            subclass.registered_name = name
            return subclass

        return add_to_registry

    @classmethod
    def _lookup(cls, name: str) -> Entry:
        try:
            return cls._entries()[name]
        except KeyError:
            raise ValueError(
                f"'{name}' is not registered for class '{cls.__name__}', "
                f"choose one of {cls.registered_names()}."
            ) from None

    @classmethod
    def get_class_by_name(cls, name: str) -> Type:
        return cls._lookup(name)[0]

    @classmethod
    def get_config_class_by_name(cls, name: str) -> Type:
        config_cls = cls._lookup(name)[1]
        if config_cls is None:
            raise ValueError(f"'{name}' in {cls.__name__} is not built from a config class.")
        return config_cls

    @classmethod
    def create(cls, name: str, *args, **kwargs):
        """Instantiates the class registered as `name`."""
        return cls.get_class_by_name(name)(*args, **kwargs)

    @classmethod
    def registered_names(cls) -> List[str]:
        return sorted(cls._entries())

    @classmethod
    def registered_configs(cls) -> List[Type]:
        return [config for _, config in cls._entries().values() if config is not None]
