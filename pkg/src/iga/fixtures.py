"""Bundled example games."""

from importlib import resources

from .game import Game, loads_game


def fixture_names() -> list[str]:
    files = resources.files(__package__).joinpath("games").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def fixture(name: str) -> Game:
    """Load a bundled game by name, e.g. ``fixture("pd")``."""
    path = resources.files(__package__).joinpath("games", f"{name}.json")
    if not path.is_file():
        raise KeyError(f"no bundled game {name!r}; have {fixture_names()}")
    return loads_game(path.read_text())
