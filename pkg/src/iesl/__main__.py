import sys

from iesl.harness.cli import main

sys.exit(main())
