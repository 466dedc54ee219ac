import sys

from lsevoc import main

sys.exit(main())
