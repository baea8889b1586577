import sys

from src.fl_sim.cli import main

sys.exit(main())
