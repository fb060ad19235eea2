"""Learning agents for the offloading bench."""
