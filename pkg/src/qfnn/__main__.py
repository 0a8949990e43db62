import sys

from qfnn.cli import main

sys.exit(main())
