"""Code-as-geometry toolchain for bioinspired helical, cellular and tubular designs."""

__version__ = "0.1.0"
