"""psi(A) = log lcm(A) for random and structured subsets of {1, ..., n}."""
