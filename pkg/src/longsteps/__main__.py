import sys

from longsteps.cli import main

sys.exit(main())
