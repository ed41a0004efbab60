import sys

from deflab.cli import main

sys.exit(main())
