"""Module entry point: python -m quasipot."""

from .cli import main

if __name__ == "__main__":
    main()
