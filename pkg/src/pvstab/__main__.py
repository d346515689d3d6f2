import sys

from pvstab.cli import main

sys.exit(main())
