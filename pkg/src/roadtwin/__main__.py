"""Allow ``python -m roadtwin`` as an alias for the ``roadtwin`` script."""
import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
