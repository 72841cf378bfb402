"""HTTP service wrapping the simulator: schemas, operations, FastAPI app."""
