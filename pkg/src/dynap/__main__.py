import sys

from dynap.cli import main

sys.exit(main())
