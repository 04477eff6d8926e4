from importlib import metadata, resources


def read_version() -> str:
    try:
        return metadata.version(__package__ or "flockdelay")
    except metadata.PackageNotFoundError:
        return resources.files("flockdelay").joinpath("VERSION").read_text(encoding="utf-8").strip()


__version__ = read_version()
