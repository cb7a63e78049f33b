import sys

from octowrap.cli import main

sys.exit(main())
