import sys

from tecrepeater.cli import main

sys.exit(main())
