import sys

from replicoal.cli.app import main

sys.exit(main())
