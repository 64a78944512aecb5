import sys

from fracstab.cli import main

sys.exit(main())
