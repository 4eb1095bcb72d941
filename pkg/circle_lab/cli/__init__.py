"""Command-line front end: experiment configs, subcommand handlers and the self-test."""
