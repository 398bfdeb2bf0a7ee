import sys

from hybridprice.cli import main

sys.exit(main())
