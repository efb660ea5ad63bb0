from kplist.cli.modes import Mode, execute, resolve_graph
