import sys

from restriction_lab.cli import main

sys.exit(main())
