"""Battle Royale Optimizer (BRO), its modified-movement variant and a benchmark harness."""
