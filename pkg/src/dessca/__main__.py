import sys

from dessca.cli import main

sys.exit(main())
