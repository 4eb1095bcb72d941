import sys

from circle_lab.cli.main import main

sys.exit(main())
