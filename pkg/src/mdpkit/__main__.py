from mdpkit.cli import main

raise SystemExit(main())
