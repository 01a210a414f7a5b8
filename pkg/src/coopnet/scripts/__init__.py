"""Command-line front end and figure-suite driver."""
