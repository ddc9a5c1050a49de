import sys

from dpbound.cli import main

sys.exit(main())
