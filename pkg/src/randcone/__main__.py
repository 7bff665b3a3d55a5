import sys

from randcone.cli import main

sys.exit(main())
