import sys

from capflow.main import main

sys.exit(main())
