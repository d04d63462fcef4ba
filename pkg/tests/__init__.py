# Do nothing.
