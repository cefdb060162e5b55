import sys

from corrtax.cli import main

sys.exit(main())
