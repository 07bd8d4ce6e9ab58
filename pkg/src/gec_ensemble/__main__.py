import sys

from gec_ensemble.cli import main

sys.exit(main())
