from ambientis.cli import main

raise SystemExit(main())
