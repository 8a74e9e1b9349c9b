"""Signal-subgraph graph classification."""
