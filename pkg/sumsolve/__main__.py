import sys

from sumsolve.cli import main

sys.exit(main())
