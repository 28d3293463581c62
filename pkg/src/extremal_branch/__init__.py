"""Branch tracing and verification for singular radial elliptic problems."""
