"""Allow `python -m riemprod`."""
import sys

from riemprod.main import main

sys.exit(main())
