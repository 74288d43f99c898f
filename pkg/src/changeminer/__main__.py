import sys

from changeminer.cli import main

sys.exit(main())
