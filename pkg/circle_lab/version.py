"""
Version information for circle-lab.
"""
import platform

import numpy
import scipy
import sympy

__version__ = "0.3.0"
__version_info__ = (0, 3, 0)

RELEASE_DATE = "2026-10-19"
RELEASE_NAME = "Mollifiers and kernel pieces"


def get_version() -> str:
    """Get current version string."""
    return __version__


def get_version_info() -> tuple:
    """Get version as tuple (major, minor, patch)."""
    return __version_info__


def get_release_info() -> dict:
    """Get release information, including the numeric stack it runs on."""
    return {
        "version": __version__,
        "release_date": RELEASE_DATE,
        "release_name": RELEASE_NAME,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
    }


def format_version_info() -> str:
    """Format version information for display."""
    info = get_release_info()
    return (
        f"circle-lab {info['version']} ({info['release_name']}, {info['release_date']})\n"
        f"python {info['python']}, numpy {info['numpy']}, scipy {info['scipy']}, "
        f"sympy {info['sympy']}"
    )


def main():
    """Print version information."""
    print(format_version_info())


if __name__ == "__main__":
    main()
