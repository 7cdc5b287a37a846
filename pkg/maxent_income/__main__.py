import sys

from maxent_income.cli import main

sys.exit(main())
