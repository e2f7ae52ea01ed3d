import sys

from bigeo.cli import main

sys.exit(main())
