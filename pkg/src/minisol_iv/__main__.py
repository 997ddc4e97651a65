import sys

from minisol_iv.cli import main

sys.exit(main())
